import json

import httpx
import pytest
from fastapi.testclient import TestClient

from hlsim import cli
from hlsim.bench import grover_allneg
from hlsim.service import create_app
from hlsim.textfmt import emit_circuit

BELL = "qubits 2\nh 0\ncx 0 1\n"


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    assert client.get("/health").json()["status"] == "ok"


def test_simulate(client):
    r = client.post("/simulate", json={"circuit": BELL, "x": "00"})
    assert r.status_code == 200
    body = r.json()
    assert abs(body["probability"] - 0.5) < 1e-12 and body["chi"] == 1


def test_parse_error_is_422(client):
    r = client.post("/simulate", json={"circuit": "qubits 2\ncx 0 0\n", "x": "00"})
    assert r.status_code == 422
    body = r.json()
    assert body["kind"] == "parse"
    assert body["diagnostics"][0]["code"] == "duplicate-operands"
    assert body["diagnostics"][0]["line"] == 2


def test_usage_error_is_400(client):
    r = client.post("/simulate", json={"circuit": BELL, "x": "0"})
    assert r.status_code == 400 and r.json()["kind"] == "usage"
    r = client.post("/bench", json={"family": "nope"})
    assert r.status_code == 400


def test_decomp_lower_verify(client):
    r = client.post("/decomp", json={"predicate": "(gt x y)", "widths": {"x": 4, "y": 4}}).json()
    assert r["term_count"] <= 4 and r["model_count"] == 120
    r = client.post("/lower", json={"circuit": "qubits 2\nh 0\nt 0\n"}).json()
    assert r["chi"] == 2 and r["gates"][0]["terms"] == 2
    text = emit_circuit(grover_allneg(3, 2))
    r = client.post("/verify", json={"circuit": text, "x": "000"}).json()
    assert r["ok"] and r["difference"] < 1e-8


def test_generate_and_bench(client):
    g = client.post("/generate", json={"family": "comparator", "k": 2}).json()
    assert g["circuit"].startswith("qubits 5\n")
    b = client.post("/bench", json={"family": "comparator", "k": 2, "x": "00000"}).json()
    assert b["row"]["chi"] == 3 and b["circuit"] == g["circuit"]


# CLI


@pytest.fixture
def bell(tmp_path):
    p = tmp_path / "bell.hqc"
    p.write_text(BELL)
    return str(p)


def test_cli_simulate(bell, capsys):
    assert cli.main(["simulate", bell, "--x", "00", "--threads", "1"]) == 0
    assert capsys.readouterr().out.strip() == "0.5"


def test_cli_decomp(capsys):
    assert cli.main(["decomp", "(gt x y)", "--widths", "x=4,y=4"]) == 0
    out = capsys.readouterr().out.splitlines()
    terms = int(out[-2].split()[1])
    assert terms <= 4 and len(out) == terms + 2


def test_cli_verify(tmp_path, capsys):
    p = tmp_path / "grover3.hqc"
    p.write_text(emit_circuit(grover_allneg(3, 2)))
    assert cli.main(["verify", str(p), "--x", "000"]) == 0
    diff = float(capsys.readouterr().out.splitlines()[-1].split()[-1])
    assert diff < 1e-8


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.hqc"
    bad.write_text("qubits 2\ncx 0 0\n")
    assert cli.main(["simulate", str(bad), "--x", "00"]) == 2
    assert "duplicate qubit operands" in capsys.readouterr().err
    assert cli.main(["simulate", str(tmp_path / "missing.hqc"), "--x", "00"]) == 2
    assert cli.run_cli(["simulate"]) == 2


def test_cli_bench_csv(tmp_path, capsys):
    out = tmp_path / "r.csv"
    emit = tmp_path / "g.hqc"
    argv = ["bench", "--family", "grover-allneg", "--params", "n=3,rounds=2", "--threads", "1",
            "--csv", str(out), "--emit", str(emit)]
    assert cli.main(argv) == 0
    row = json.loads(capsys.readouterr().out)
    assert row["chi"] == 16
    assert out.read_text().splitlines()[0].startswith("family,n,k")
    assert emit.read_text() == emit_circuit(grover_allneg(3, 2))


def test_cli_generate(capsys):
    assert cli.main(["generate", "--family", "comparator", "--k", "3"]) == 0
    assert capsys.readouterr().out.startswith("qubits 7\n")


def test_cli_remote(bell, monkeypatch, capsys, client):
    def post(url, json, timeout):
        return client.post(url.replace("http://svc", ""), json=json)

    monkeypatch.setattr(httpx, "post", post)
    assert cli.main(["--url", "http://svc", "simulate", bell, "--x", "11"]) == 0
    assert capsys.readouterr().out.strip() == "0.5"
    assert cli.main(["--url", "http://svc", "simulate", bell, "--x", "1"]) == 2
    assert "bad-target" in capsys.readouterr().err


def test_cli_remote_unreachable(bell, capsys):
    assert cli.main(["--url", "http://127.0.0.1:9", "simulate", bell, "--x", "00"]) == 2
    assert "error:" in capsys.readouterr().err
