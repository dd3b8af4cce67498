"""HTTP service exposing simulation, lowering, decomposition, verification and benchmarks.

Handlers are plain functions over pydantic models so the CLI can call them
in-process; ``create_app`` wires the same functions into FastAPI routes.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .bench import BenchmarkSpec, csv_row, generate
from .circuit import Diagnostic, Register
from .decomp import build_effectual
from .dense import DEFAULT_CAP, CapExceeded, dense_simulate
from .engine import strong_simulate
from .lowering import AncillaBudgetExceeded, LoweringConfig, format_gadgetized, gadgetize
from .textfmt import ParseError, emit_circuit, parse_circuit, parse_predicate


class DiagnosticModel(BaseModel):
    code: str
    message: str
    line: int = 0
    col: int = 0


class ServiceError(Exception):
    """A request that cannot be served; ``kind`` is 'usage' or 'parse'."""

    def __init__(self, kind: str, diagnostics: list[Diagnostic]):
        self.kind = kind
        self.diagnostics = diagnostics
        super().__init__("; ".join(map(str, diagnostics)))


class ErrorResponse(BaseModel):
    kind: str
    diagnostics: list[DiagnosticModel]


class CircuitRequest(BaseModel):
    circuit: str = Field(description="circuit text in the .hqc format")
    base_dir: Optional[str] = Field(default=None, description="directory for resolving table files")
    ancilla_budget: Optional[int] = None
    oracle_u_route: str = "auto"


class SimulateRequest(CircuitRequest):
    x: str
    workers: Optional[int] = 1


class SimulateResponse(BaseModel):
    probability: float
    amplitude: tuple[float, float]
    chi: int
    terms_evaluated: int
    zero_terms: int
    total_qubits: int
    compensation: float
    time_ms: float


class GateReportModel(BaseModel):
    index: int
    gate: str
    terms: int
    skeleton_size: int
    ancillas: int


class LowerResponse(BaseModel):
    text: str
    chi: int
    mu: int
    total_qubits: int
    ancilla_pool: int
    compensation: float
    gates: list[GateReportModel]


class DecompRequest(BaseModel):
    predicate: str
    widths: dict[str, int]


class TermModel(BaseModel):
    weight: tuple[float, float]
    prep: str


class DecompResponse(BaseModel):
    arity: int
    terms: list[TermModel]
    term_count: int
    model_count: int
    text: str


class VerifyRequest(SimulateRequest):
    cap: int = DEFAULT_CAP
    tolerance: float = 1e-8


class VerifyResponse(BaseModel):
    strong_amplitude: tuple[float, float]
    dense_amplitude: tuple[float, float]
    strong_probability: float
    dense_probability: float
    difference: float
    ok: bool


class BenchRequest(BaseModel):
    family: str
    n: int = 3
    k: int = 1
    rounds: Optional[int] = None
    seed: int = 0
    x: Optional[str] = None
    workers: Optional[int] = 1


class BenchResponse(BaseModel):
    row: dict
    circuit: str


class GenerateResponse(BaseModel):
    circuit: str


def _diag_models(diags) -> list[DiagnosticModel]:
    return [DiagnosticModel(code=d.code, message=d.message, line=d.line, col=d.col) for d in diags]


def _usage(message: str, code: str = "usage") -> ServiceError:
    return ServiceError("usage", [Diagnostic(code, message)])


def _parse(req: CircuitRequest):
    try:
        return parse_circuit(req.circuit, base_dir=req.base_dir)
    except ParseError as exc:
        raise ServiceError("parse", exc.diagnostics) from None


def _config(req: CircuitRequest) -> LoweringConfig:
    if req.oracle_u_route not in ("auto", "direct", "ancilla"):
        raise _usage(f"unknown oracle-U route {req.oracle_u_route!r}")
    return LoweringConfig(ancilla_budget=req.ancilla_budget, oracle_u_route=req.oracle_u_route)


def _gadgetize(circuit, config):
    try:
        return gadgetize(circuit, config)
    except AncillaBudgetExceeded as exc:
        raise _usage(str(exc), "ancilla-budget") from None


def _simulate(gc, x: str, workers: Optional[int]):
    if workers is not None and workers < 1:
        raise _usage("workers must be positive")
    try:
        return strong_simulate(gc, x, workers=workers)
    except ValueError as exc:
        raise _usage(str(exc), "bad-target") from None


def simulate(req: SimulateRequest) -> SimulateResponse:
    circuit = _parse(req)
    gc = _gadgetize(circuit, _config(req))
    r = _simulate(gc, req.x, req.workers)
    return SimulateResponse(
        probability=r.probability,
        amplitude=(r.amplitude.real, r.amplitude.imag),
        chi=r.chi,
        terms_evaluated=r.terms_evaluated,
        zero_terms=r.zero_terms,
        total_qubits=gc.total_qubits,
        compensation=gc.compensation,
        time_ms=r.wall_time * 1000,
    )


def lower(req: CircuitRequest) -> LowerResponse:
    gc = _gadgetize(_parse(req), _config(req))
    return LowerResponse(
        text=format_gadgetized(gc),
        chi=gc.chi,
        mu=gc.mu,
        total_qubits=gc.total_qubits,
        ancilla_pool=gc.total_qubits - gc.num_qubits,
        compensation=gc.compensation,
        gates=[GateReportModel(**r.__dict__) for r in gc.per_gate_report],
    )


def decomp(req: DecompRequest) -> DecompResponse:
    regs, pos = [], 0
    for name, w in req.widths.items():
        if w < 1:
            raise _usage(f"width of {name} must be positive")
        regs.append(Register(name, tuple(range(pos, pos + w))))
        pos += w
    try:
        pred = parse_predicate(req.predicate, regs)
    except ParseError as exc:
        raise ServiceError("parse", exc.diagnostics) from None
    try:
        d = build_effectual(pred)
    except ValueError as exc:
        raise _usage(str(exc), "shared-variables") from None
    terms = [
        TermModel(weight=(t.weight.real, t.weight.imag), prep="; ".join(map(str, t.prep)) or "id")
        for t in d.terms
    ]
    text = "".join(f"{t.weight[0]!r} {t.weight[1]!r} : {t.prep}\n" for t in terms)
    return DecompResponse(arity=d.arity, terms=terms, term_count=len(terms), model_count=d.model_count, text=text)


def verify(req: VerifyRequest) -> VerifyResponse:
    circuit = _parse(req)
    gc = _gadgetize(circuit, _config(req))
    r = _simulate(gc, req.x, req.workers)
    try:
        d = dense_simulate(circuit, req.x, cap=req.cap)
    except CapExceeded as exc:
        raise _usage(str(exc), "cap") from None
    diff = abs(r.amplitude - d)
    return VerifyResponse(
        strong_amplitude=(r.amplitude.real, r.amplitude.imag),
        dense_amplitude=(d.real, d.imag),
        strong_probability=r.probability,
        dense_probability=abs(d) ** 2,
        difference=diff,
        ok=bool(diff <= req.tolerance and math.isfinite(diff)),
    )


def _spec(req: BenchRequest) -> BenchmarkSpec:
    try:
        return BenchmarkSpec(req.family, req.n, req.k, req.rounds, req.seed)
    except ValueError as exc:
        raise _usage(str(exc)) from None


def generate_circuit(req: BenchRequest) -> GenerateResponse:
    try:
        return GenerateResponse(circuit=emit_circuit(generate(_spec(req))))
    except ValueError as exc:
        raise _usage(str(exc)) from None


def bench(req: BenchRequest) -> BenchResponse:
    spec = _spec(req)
    try:
        circuit = generate(spec)
    except ValueError as exc:
        raise _usage(str(exc)) from None
    gc = _gadgetize(circuit, LoweringConfig())
    x = req.x if req.x is not None else "0" * circuit.num_qubits
    r = _simulate(gc, x, req.workers)
    return BenchResponse(row=csv_row(spec, circuit, r, gc.total_qubits), circuit=emit_circuit(circuit))


def create_app() -> FastAPI:
    app = FastAPI(title="hlsim", version=__version__)

    @app.exception_handler(ServiceError)
    async def _service_error(_, exc: ServiceError):
        status = 422 if exc.kind == "parse" else 400
        body = ErrorResponse(kind=exc.kind, diagnostics=_diag_models(exc.diagnostics))
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    app.post("/simulate", response_model=SimulateResponse)(simulate)
    app.post("/lower", response_model=LowerResponse)(lower)
    app.post("/decomp", response_model=DecompResponse)(decomp)
    app.post("/verify", response_model=VerifyResponse)(verify)
    app.post("/generate", response_model=GenerateResponse)(generate_circuit)
    app.post("/bench", response_model=BenchResponse)(bench)
    return app


def error_from_json(status: int, payload: dict) -> ServiceError:
    diags = [Diagnostic(**d) for d in payload.get("diagnostics", [])] or [Diagnostic("http", f"status {status}")]
    return ServiceError(payload.get("kind", "usage"), diags)


def read_circuit_file(path: str) -> tuple[str, str]:
    p = Path(path)
    return p.read_text(encoding="utf-8"), str(p.parent.resolve())
