"""Command-line client.

By default requests are served in-process; ``--url`` sends them to a running
``hlsim serve`` instead.  Exit codes: 0 success, 1 verification failure,
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import service
from .bench import FAMILIES, append_csv
from .engine import default_workers
from .textfmt import ParseError, emit_circuit, parse_circuit_file

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class _Client:
    def __init__(self, url: Optional[str]):
        self.url = url.rstrip("/") if url else None

    def call(self, route: str, handler, req):
        if self.url is None:
            return handler(req)
        import httpx

        try:
            resp = httpx.post(f"{self.url}/{route}", json=req.model_dump(), timeout=None)
        except httpx.HTTPError as exc:
            raise service.ServiceError("usage", [service.Diagnostic("http", f"{self.url}: {exc}")]) from None
        if resp.status_code != 200:
            try:
                payload = resp.json()
            except ValueError:
                payload = {}
            raise service.error_from_json(resp.status_code, payload)
        model = handler.__annotations__["return"]
        model = getattr(service, model) if isinstance(model, str) else model
        return model.model_validate(resp.json())


def _circuit_fields(path: str, remote: bool) -> dict:
    try:
        text, base = service.read_circuit_file(path)
    except OSError as exc:
        raise service.ServiceError("usage", [service.Diagnostic("file", f"cannot read {path}: {exc.strerror}")])
    if remote:
        # table files live next to the circuit, so inline them before sending
        try:
            return {"circuit": emit_circuit(parse_circuit_file(path)), "base_dir": None}
        except ParseError as exc:
            raise service.ServiceError("parse", exc.diagnostics) from None
    return {"circuit": text, "base_dir": base}


def _widths(text: str) -> dict[str, int]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, w = part.partition("=")
        if not name or not w.isdigit():
            raise argparse.ArgumentTypeError(f"expected NAME=WIDTH, got {part!r}")
        out[name] = int(w)
    return out


def _params(text: str) -> dict[str, int]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, _, val = part.partition("=")
        if key not in ("n", "k", "rounds", "seed", "l") or not val.isdigit():
            raise argparse.ArgumentTypeError(f"expected KEY=INT with KEY in n,k,l,rounds,seed; got {part!r}")
        out["k" if key == "l" else key] = int(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hlsim", description="Strong simulation of circuits with high-level gates.")
    p.add_argument("--url", help="send requests to a running server instead of computing in-process")
    sub = p.add_subparsers(dest="command", required=True)

    def circuit_cmd(name: str, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file")
        sp.add_argument("--ancilla-budget", type=int)
        sp.add_argument("--route", choices=("auto", "direct", "ancilla"), default="auto", help="oracle-U construction")
        return sp

    sp = circuit_cmd("simulate", "print the probability of one output string")
    sp.add_argument("--x", required=True)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--json", action="store_true")

    sp = circuit_cmd("lower", "print the gadgetized circuit and chi")
    sp.add_argument("--json", action="store_true")

    sp = circuit_cmd("verify", "compare against the dense reference")
    sp.add_argument("--x", required=True)
    sp.add_argument("--cap", type=int, default=service.DEFAULT_CAP)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("decomp", help="decompose an effectual state")
    sp.add_argument("predicate")
    sp.add_argument("--widths", type=_widths, required=True, help="e.g. x=4,y=4")

    for name in ("bench", "generate"):
        sp = sub.add_parser(name, help="run a benchmark instance" if name == "bench" else "emit a benchmark circuit")
        sp.add_argument("--family", choices=FAMILIES, required=True)
        sp.add_argument("--params", type=_params, default={}, help="e.g. n=5,k=2,seed=7")
        sp.add_argument("--n", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--rounds", type=int)
        sp.add_argument("--seed", type=int)
        if name == "bench":
            sp.add_argument("--x")
            sp.add_argument("--threads", type=int, default=None)
            sp.add_argument("--csv")
            sp.add_argument("--emit", help="also write the generated circuit here")

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    return p


def _bench_request(args) -> service.BenchRequest:
    vals = {"n": 3, "k": 1, "rounds": None, "seed": 0, **args.params}
    for key in ("n", "k", "rounds", "seed"):
        if getattr(args, key) is not None:
            vals[key] = getattr(args, key)
    extra = {}
    if args.command == "bench":
        extra = {"x": args.x, "workers": args.threads or default_workers()}
    return service.BenchRequest(family=args.family, **vals, **extra)


def _run(args, client: _Client) -> int:
    remote = client.url is not None
    cmd = args.command
    if cmd in ("simulate", "lower", "verify"):
        fields = _circuit_fields(args.file, remote)
        fields.update(ancilla_budget=args.ancilla_budget, oracle_u_route=args.route)
    if cmd == "simulate":
        req = service.SimulateRequest(**fields, x=args.x, workers=args.threads or default_workers())
        res = client.call("simulate", service.simulate, req)
        print(res.model_dump_json(indent=2) if args.json else f"{res.probability:.12g}")
        return EXIT_OK
    if cmd == "lower":
        res = client.call("lower", service.lower, service.CircuitRequest(**fields))
        print(res.model_dump_json(indent=2) if args.json else res.text, end="" if not args.json else "\n")
        return EXIT_OK
    if cmd == "verify":
        req = service.VerifyRequest(**fields, x=args.x, workers=args.threads, cap=args.cap, tolerance=args.tol)
        res = client.call("verify", service.verify, req)
        print(f"strong {res.strong_probability:.12g}")
        print(f"dense  {res.dense_probability:.12g}")
        print(f"amplitude difference {res.difference:.3e}")
        return EXIT_OK if res.ok else EXIT_VERIFY
    if cmd == "decomp":
        res = client.call("decomp", service.decomp, service.DecompRequest(predicate=args.predicate, widths=args.widths))
        sys.stdout.write(res.text)
        print(f"terms {res.term_count}")
        print(f"models {res.model_count}")
        return EXIT_OK
    if cmd == "generate":
        res = client.call("generate", service.generate_circuit, _bench_request(args))
        sys.stdout.write(res.circuit)
        return EXIT_OK
    if cmd == "bench":
        res = client.call("bench", service.bench, _bench_request(args))
        if args.emit:
            with open(args.emit, "w", encoding="utf-8") as fh:
                fh.write(res.circuit)
        if args.csv:
            append_csv(args.csv, res.row)
        print(json.dumps(res.row))
        return EXIT_OK
    if cmd == "serve":
        import uvicorn

        uvicorn.run(service.create_app(), host=args.host, port=args.port)
        return EXIT_OK
    raise AssertionError(cmd)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args, _Client(args.url))
    except service.ServiceError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run_cli(argv: Sequence[str]) -> int:
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
