"""Command-line front end.

Subcommands ``gamma``, ``nodal``, ``franson``, ``projection`` and
``selftest``. Problem input is one JSON document (``--input`` file or
stdin); complex numbers are ``[re, im]`` pairs and matrices are row-major.
Sweeps write CSV with a header row and loci as trailing ``#`` comment lines.

Exit codes: 0 on success (undefined phases included), 1 when the self-test
fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import MixedPhaseError, ValidationError
from .linalg import (
    DEFAULT_TOLERANCES,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ToleranceConfig,
    as_unitary,
    exp_hermitian,
)
from .phases import gamma
from .selftest import encode, run_selftest
from .states import OrthogonalFamily
from .sweeps import franson_sweep, nodal_rows, projection_rows
from .transport import GeneratorPath, integrate, polarization_rotation

EXIT_OK, EXIT_SELFTEST, EXIT_INVALID = 0, 1, 2


def fmt(x) -> str:
    """Fixed 12-significant-digit formatting; empty for a missing value."""
    if x is None:
        return ""
    return format(float(x), ".12g")


def decode_complex(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ValidationError(f"expected a number or an [re, im] pair, got {x!r}")


def decode_matrix(rows, n: int, name: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n or any(
            not isinstance(r, list) or len(r) != n for r in rows):
        raise ValidationError(f"{name} must be a {n} x {n} row-major list")
    return np.array([[decode_complex(v) for v in r] for r in rows], dtype=complex)


class PiecewiseLinear:
    """Linear interpolation between generator samples on a uniform grid over ``[s0, s1]``."""

    def __init__(self, samples: np.ndarray, s0: float, s1: float):
        self.samples, self.s0, self.s1 = samples, s0, s1

    def __call__(self, s: float) -> np.ndarray:
        k = len(self.samples) - 1
        if k == 0:
            return self.samples[0]
        x = (s - self.s0) / (self.s1 - self.s0) * k
        i = min(max(int(math.floor(x)), 0), k - 1)
        t = x - i
        return (1 - t) * self.samples[i] + t * self.samples[i + 1]


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    family: OrthogonalFamily
    unitary: Any  # matrix or Propagator
    sequence: tuple[int, ...]
    tol: ToleranceConfig
    offdiagonal_generator: bool = False

    @classmethod
    def from_json(cls, doc: dict, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> "ProblemSpec":
        if not isinstance(doc, dict):
            raise ValidationError("problem must be a JSON object")
        unknown = set(doc) - {"dim", "spectrum", "basis", "unitary", "sequence", "tolerances"}
        if unknown:
            raise ValidationError(f"unknown problem keys: {sorted(unknown)}")
        for key in ("dim", "spectrum", "unitary", "sequence"):
            if key not in doc:
                raise ValidationError(f"problem is missing {key!r}")
        if "tolerances" in doc:
            tol = ToleranceConfig.from_mapping({**_fields(tol), **doc["tolerances"]})
        n = doc["dim"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValidationError("dim must be a positive integer")
        spectrum = doc["spectrum"]
        if not isinstance(spectrum, list) or len(spectrum) != n:
            raise ValidationError(f"spectrum must list {n} eigenvalues")
        basis = None if doc.get("basis") is None else decode_matrix(doc["basis"], n, "basis")
        family = OrthogonalFamily.from_spectrum([float(x) for x in spectrum], basis, tol=tol)
        seq = doc["sequence"]
        if not isinstance(seq, list) or any(not isinstance(j, int) or isinstance(j, bool)
                                            for j in seq):
            raise ValidationError("sequence must be a list of integer labels")
        unitary, offdiag = _decode_unitary(doc["unitary"], family, tol)
        return cls(family, unitary, tuple(seq), tol, offdiag)


def _fields(tol: ToleranceConfig) -> dict:
    return dataclasses.asdict(tol)


def _offdiagonal(j: np.ndarray, family: OrthogonalFamily, tol: ToleranceConfig) -> bool:
    d = np.diag(family.to_basis(j))
    return bool(np.max(np.abs(d)) <= tol.transport and abs(np.trace(j)) <= tol.transport)


def _decode_unitary(u, family: OrthogonalFamily, tol: ToleranceConfig):
    """The evolution as a matrix or a :class:`Propagator`, plus whether its constant
    generator is known to be off-diagonal in the family basis."""
    n = family.dim
    if not isinstance(u, dict) or "kind" not in u:
        raise ValidationError("unitary must be an object with a 'kind'")
    kind = u["kind"]
    if kind == "matrix":
        return as_unitary(decode_matrix(u.get("matrix"), n, "unitary matrix"), tol, "unitary"), False
    if kind == "path":
        raw = u.get("samples")
        if not isinstance(raw, list) or not raw:
            raise ValidationError("path needs a nonempty list of generator samples")
        samples = np.array([decode_matrix(m, n, "generator sample") for m in raw])
        s0, s1 = float(u.get("s0", 0.0)), float(u.get("s1", 1.0))
        steps = u.get("steps", 1024)
        path = GeneratorPath(family.basis, PiecewiseLinear(samples, s0, s1), s0, s1)
        return integrate(path, steps, tol=tol), False
    if kind == "polarization":
        if n != 2:
            raise ValidationError("polarization unitaries are 2 x 2")
        beta, theta = float(u["beta"]), float(u["theta"])
        j = 0.5 * beta * (math.cos(theta) * SIGMA_X + math.sin(theta) * SIGMA_Y)
        return polarization_rotation(beta, theta), _offdiagonal(j, family, tol)
    if kind == "precession":
        if n != 2:
            raise ValidationError("precession unitaries are 2 x 2")
        delta = float(u["delta"])
        axis = np.asarray(u.get("axis", [1.0, 0.0, 0.0]), dtype=float)
        if axis.shape != (3,) or not np.linalg.norm(axis) > 0:
            raise ValidationError("axis must be a nonzero 3-vector")
        axis = axis / np.linalg.norm(axis)
        j = axis[0] * SIGMA_X + axis[1] * SIGMA_Y + axis[2] * SIGMA_Z
        return exp_hermitian(j, delta, tol), _offdiagonal(delta * j, family, tol)
    raise ValidationError(f"unknown unitary kind {kind!r}")


def cmd_gamma(doc: dict, method: str, tol: ToleranceConfig) -> dict:
    spec = ProblemSpec.from_json(doc, tol)
    r = gamma(spec.unitary, spec.family, spec.sequence, method=method, tol=spec.tol)
    report = {"trace": encode(r.value), "defined": r.defined}
    if r.defined:
        report["factor"] = encode(r.factor)
        report["argument"] = r.argument
    report["method"] = r.method
    report["transport_verified"] = bool(r.transport_verified or spec.offdiagonal_generator)
    return report


def write_csv(header, rows, loci=None, loci_name="loci") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    if loci is not None:
        buf.write(f"# {loci_name}: " + ",".join(fmt(x) for x in loci) + "\n")
    return buf.getvalue()


def linspace_arg(values) -> list[float]:
    start, stop, num = values
    if int(num) != num or num < 1:
        raise ValidationError("grid NUM must be a positive integer")
    return [float(x) for x in np.linspace(start, stop, int(num))]


def _grid(args, doc, name) -> list[float]:
    if doc is not None and name in doc:
        return [float(x) for x in doc[name]]
    given = getattr(args, name)
    if given is None:
        raise ValidationError(f"missing grid --{name.replace('_', '-')}")
    return linspace_arg(given)


def _value(args, doc, name, default=None):
    if doc is not None and name in doc:
        return doc[name]
    v = getattr(args, name, None)
    if v is None:
        if default is None:
            raise ValidationError(f"missing --{name}")
        return default
    return v


def cmd_nodal(args, doc) -> str:
    rows = nodal_rows(_grid(args, doc, "fidelity_grid"), _grid(args, doc, "omega_grid"))
    return write_csv(["F_B", "Omega", "eta_node"], rows)


def cmd_franson(args, doc, tol) -> str:
    order = int(_value(args, doc, "order"))
    points, loci = franson_sweep(float(_value(args, doc, "r")), _grid(args, doc, "beta_grid"),
                                 float(_value(args, doc, "theta", 0.0)), order,
                                 jobs=args.jobs, tol=tol)
    rows = [(p.beta, p.visibility, p.phase, p.trace.real, p.trace.imag) for p in points]
    return write_csv(["beta", "visibility", "phase", "trace_re", "trace_im"], rows,
                     loci, "sign_changes")


def cmd_projection(args, doc, tol) -> str:
    rows, loci = projection_rows(float(_value(args, doc, "lambda1")),
                                 float(_value(args, doc, "theta")),
                                 _grid(args, doc, "delta_grid"), tol=tol)
    return write_csv(["delta", "arg_mod_2pi"], rows, loci, "jumps")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON input file ('-' for stdin)")
    common.add_argument("--output", help="output file (default stdout)")
    common.add_argument("--seed", type=int, default=0, help="64-bit seed for random suites")
    common.add_argument("--tolerance-file", help="JSON object of ToleranceConfig overrides")
    common.add_argument("--method", choices=("auto", "dense", "perm"), default="auto")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    p = argparse.ArgumentParser(prog="mixedphase",
                                description="Off-diagonal mixed-state geometric phases.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("gamma", parents=[common], help="phase of one problem (JSON in, JSON out)")

    grid = dict(nargs=3, type=float, metavar=("START", "STOP", "NUM"))
    s = sub.add_parser("nodal", parents=[common], help="nodal surface eta(F_B, Omega) as CSV")
    s.add_argument("--fidelity-grid", **grid)
    s.add_argument("--omega-grid", **grid)

    s = sub.add_parser("franson", parents=[common], help="simulated fringe sweep over beta as CSV")
    s.add_argument("--r", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--order", type=int, choices=(1, 2))
    s.add_argument("--beta-grid", **grid)

    s = sub.add_parser("projection", parents=[common], help="projection phase over delta as CSV")
    s.add_argument("--lambda1", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--delta-grid", **grid)

    s = sub.add_parser("selftest", parents=[common], help="oracle-equivalence and invariant suites")
    s.add_argument("--max-dim", type=int, default=8)
    s.add_argument("--trials", type=int, default=20)
    return p


def _read_input(path):
    if path is None:
        return None
    text = sys.stdin.read() if path == "-" else open(path).read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"input is not valid JSON: {exc}") from exc


def _emit(text: str, path) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol = DEFAULT_TOLERANCES
        if args.tolerance_file:
            tol = ToleranceConfig.from_file(args.tolerance_file)
        if args.jobs < 1:
            raise ValidationError("--jobs must be positive")
        if args.command == "gamma":
            doc = _read_input(args.input if args.input else "-")
            _emit(_dump(cmd_gamma(doc, args.method, tol)), args.output)
            return EXIT_OK
        doc = _read_input(args.input)
        if doc is not None and not isinstance(doc, dict):
            raise ValidationError("input must be a JSON object")
        if args.command == "nodal":
            _emit(cmd_nodal(args, doc), args.output)
        elif args.command == "franson":
            _emit(cmd_franson(args, doc, tol), args.output)
        elif args.command == "projection":
            _emit(cmd_projection(args, doc, tol), args.output)
        else:
            doc = doc or {}
            report = run_selftest(int(doc.get("max_dim", args.max_dim)),
                                  int(doc.get("trials", args.trials)),
                                  int(doc.get("seed", args.seed)),
                                  spectra=doc.get("spectra", []), tol=tol)
            _emit(_dump(report), args.output)
            return EXIT_OK if report["passed"] else EXIT_SELFTEST
    except (MixedPhaseError, ValueError, KeyError, TypeError, OSError) as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stdout.write(_dump(err))
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
