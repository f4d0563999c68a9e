"""``maggeom`` command-line tool.

Exit codes: 0 success, 1 malformed input or arguments, 2 no magnitude
weighting, 3 numerical failure, 4 hypotheses of the requested statement fail.
On a nonzero exit nothing is written to standard output; the diagnostic goes
to standard error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .analysis import (
    hemisphere_monte_carlo,
    negative_type_upper_bound,
    rank2_equality_example,
    entrywise_square,
    spread_report,
    tensor_bound_check,
)
from .documents import parse_input, render_human, render_structured, to_jsonable
from .errors import (
    HypothesisError,
    InvalidInput,
    MaggeomError,
    NoWeighting,
    NumericalFailure,
    SingularMatrix,
)
from .geometry import LIGHTLIKE_BAND, augmented_circumsphere, circumsphere_certificate
from .linalg import DEFAULT_ZERO_TOL
from .magnitude import WEIGHTING_RESIDUAL_TOL, magnitude, magnitude_inverse_sum
from .metric import BLOWUP_THRESHOLD, POLE_SCALE_TOL, is_negative_type, magnitude_profile

EXIT_OK, EXIT_INPUT, EXIT_NO_WEIGHTING, EXIT_NUMERICAL, EXIT_HYPOTHESIS = range(5)
TOL_ENV = "MAGGEOM_TOL"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=argparse.SUPPRESS,
                        help=f"relative zero-eigenvalue band (default {DEFAULT_ZERO_TOL}; ${TOL_ENV} overrides)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed for Monte Carlo")
    common.add_argument("--format", choices=("human", "structured"), default=argparse.SUPPRESS)

    parser = _Parser(prog="maggeom", description="Magnitude of matrices and finite metric spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--tol", type=_positive, default=DEFAULT_ZERO_TOL, help=argparse.SUPPRESS)
    parser.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    parser.add_argument("--format", choices=("human", "structured"), default="human", help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    cmd = command("mag", "magnitude and weighting")
    cmd.add_argument("input")
    cmd.add_argument("--scale", type=_positive, default=1.0, help="scale for metric inputs")

    cmd = command("certify", "circumsphere and augmented-circumsphere certificates")
    cmd.add_argument("input")
    cmd.add_argument("--scale", type=_positive, default=1.0)

    cmd = command("profile", "magnitude over a log-uniform grid of scales, with poles")
    cmd.add_argument("input")
    cmd.add_argument("--scale-min", type=_positive, required=True)
    cmd.add_argument("--scale-max", type=_positive, required=True)
    cmd.add_argument("--samples", type=int, required=True)
    cmd.add_argument("--workers", type=int, default=None)

    cmd = command("negative-type", "Schoenberg negative-type test")
    cmd.add_argument("input")

    cmd = command("spread", "Q-spreads and barycenter-circumcenter gap")
    cmd.add_argument("input")
    cmd.add_argument("--scale", type=_positive, default=1.0)
    cmd.add_argument("--orders", type=_floats, default=[0.0, 1.0, 2.0, math.inf],
                     help="comma-separated spread orders, 'inf' allowed")

    cmd = command("bounds", "strict magnitude bound for negative type; entrywise-square bound")
    cmd.add_argument("input")
    cmd.add_argument("--scale", type=_positive, default=1.0)

    cmd = command("hemisphere-mc", "Monte Carlo: dim+1 random points on the unit sphere surround the center")
    cmd.add_argument("--dim", type=int, required=True)
    cmd.add_argument("--trials", type=int, required=True)

    cmd = command("rank2-example", "rank-2 matrix whose entrywise square has magnitude 2")
    cmd.add_argument("--angles", type=_floats, required=True, help="three comma-separated angles")
    cmd.add_argument("--degrees", action="store_true")
    return parser


def _read(path: str):
    # bytes in, so the digest covers the file exactly as stored
    try:
        if path == "-":
            raw = sys.stdin.buffer.read()
        else:
            with open(path, "rb") as fh:
                raw = fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise InvalidInput(f"{path} is not UTF-8 text") from None
    return parse_input(text)


def _magnitude_payload(res, size: int, tol: float) -> dict:
    return {
        "magnitude": res.magnitude,
        "weighting": res.weighting,
        "unique_weighting": res.unique_weighting,
        "residual_norm": res.residual_norm,
        "size": size,
        "tolerance": {"zero_band": tol, "weighting_residual": WEIGHTING_RESIDUAL_TOL * math.sqrt(size)},
    }


def _need_weighting(res):
    if not res.has_weighting:
        raise NoWeighting(f"no magnitude weighting (residual {res.residual_norm:.3g})")


def cmd_mag(args) -> dict:
    doc = _read(args.input)
    matrix = doc.similarity(args.scale)
    res = magnitude(matrix, args.tol)
    _need_weighting(res)
    out = _magnitude_payload(res, matrix.size, args.tol)
    if doc.is_metric:
        out["scale"] = args.scale
    return {"input_digest": doc.digest, "result": out}


def cmd_certify(args) -> dict:
    doc = _read(args.input)
    matrix = doc.similarity(args.scale)
    cert = circumsphere_certificate(matrix, args.tol)
    if cert.magnitude is None:
        raise NoWeighting("no magnitude weighting; no circumsphere")
    aug = augmented_circumsphere(matrix, args.tol)
    try:
        inv_sum = magnitude_inverse_sum(matrix, args.tol)
    except SingularMatrix:
        inv_sum = None
    routes = {
        "weighting_sum": cert.magnitude,
        "inverse_sum": inv_sum,
        "circumsphere": cert.magnitude_from_radius,
        "augmented": aug.magnitude,
    }
    present = {name: value for name, value in routes.items() if value is not None}
    names = list(present)
    deviations = {
        f"{first}-{second}": abs(present[first] - present[second])
        for pos, first in enumerate(names) for second in names[pos + 1:]
    }
    sphere = {
        "causal_class": cert.causal_class.value,
        "signature": list(cert.signature),
        "affine_coords": cert.affine_coords,
        "center": cert.center,
        "radial_scalar_square": cert.radial_scalar_square,
        "curvature": cert.curvature,
        "equidistance_residual": cert.equidistance_residual,
        "tolerance": {"zero_band": args.tol, "lightlike_band": LIGHTLIKE_BAND * matrix.size,
                      "equidistance": 1e-8 * (1 + abs(cert.radial_scalar_square or 0.0))},
    }
    augmented = {
        "center": aug.center,
        "radial_scalar_square": aug.radial_scalar_square,
        "equidistance_residual": aug.equidistance_residual,
        "bisector_residual": aug.bisector_residual,
        "tolerance": {"equidistance": 1e-8 * (1 + abs(aug.radial_scalar_square)), "bisector": 1e-9},
    }
    return {
        "input_digest": doc.digest,
        "result": {
            "sphere": sphere,
            "augmented_sphere": augmented,
            "magnitudes": routes,
            "deviations": deviations,
            "tolerance": {"agreement": 1e-8 * (1 + abs(cert.magnitude))},
        },
    }


def cmd_profile(args) -> dict:
    doc = _read(args.input)
    if not doc.is_metric:
        raise InvalidInput("profile needs a metric input (distance_matrix, points or graph)")
    if args.samples < 2:
        raise InvalidInput("profile needs at least 2 samples")
    if not args.scale_min < args.scale_max:
        raise InvalidInput("need scale-min < scale-max")
    prof = magnitude_profile(doc.metric_space(), args.scale_min, args.scale_max, args.samples, args.tol, args.workers)
    rows = [[float(scale), float(value), float(det)]
            for scale, value, det in zip(prof.scales, prof.values, prof.determinants)]
    poles = [{"scale": pole.scale, "scale_low": pole.scale_low, "scale_high": pole.scale_high,
              "refined": pole.refined} for pole in prof.poles]
    return {
        "input_digest": doc.digest,
        "result": {
            "columns": ["scale", "magnitude", "det"],
            "rows": rows,
            "poles": poles,
            "tolerance": {"zero_band": args.tol, "blowup": BLOWUP_THRESHOLD, "pole_scale": POLE_SCALE_TOL},
        },
    }


def cmd_negative_type(args) -> dict:
    doc = _read(args.input)
    if not doc.is_metric:
        raise InvalidInput("negative-type needs a metric input")
    space = doc.metric_space()
    rep = is_negative_type(space, args.tol)
    other = is_negative_type(space, args.tol, anchor=space.size - 1)
    return {
        "input_digest": doc.digest,
        "result": {
            "negative_type": rep.is_negative_type,
            "gram_min_eigenvalue": rep.gram_min_eigenvalue,
            "embedding": rep.embedding,
            "anchor": rep.anchor,
            "anchors_agree": rep.is_negative_type == other.is_negative_type,
            "tolerance": {"gram_eigenvalue": args.tol},
        },
    }


def cmd_spread(args) -> dict:
    doc = _read(args.input)
    source = doc.metric_space() if doc.is_metric else doc.similarity()
    rep = spread_report(source, args.orders, args.scale, args.tol)
    return {
        "input_digest": doc.digest,
        "result": {
            "orders": list(rep.orders),
            "spreads": list(rep.spreads),
            "magnitude": rep.magnitude,
            "barycenter_gap": rep.barycenter_gap,
            "gap_identity": rep.gap_identity,
            "gap_identity_residual": rep.gap_identity_residual,
            "tolerance": {"gap_identity": 1e-9 * (1 + abs(rep.barycenter_gap))},
        },
    }


def _tensor_payload(rep, tol: float) -> dict:
    return {
        "mag_z2": rep.mag2,
        "rank": rep.rank,
        "slack": rep.slack,
        "gram_det": rep.gram_det,
        "det_z2": rep.det_z2,
        "identity_residual": rep.identity_residual,
        "tolerance": {"zero_band": tol, "slack": 1e-9, "identity_relative": 1e-8},
    }


def cmd_bounds(args) -> dict:
    doc = _read(args.input)
    if not doc.is_metric:
        return {"input_digest": doc.digest,
                "result": {"tensor_bound": _tensor_payload(tensor_bound_check(doc.similarity(), args.tol), args.tol)}}
    bound = negative_type_upper_bound(doc.metric_space(), args.scale, args.tol)
    return {
        "input_digest": doc.digest,
        "result": {
            "scale": args.scale,
            "magnitude": bound.mag,
            "size": bound.size,
            "margin": bound.margin,
            "hook_residual": bound.hook_residual,
            "hook_ok": bound.hook_ok,
            "tolerance": {"zero_band": args.tol, "hook": 4 * float(np.finfo(float).eps)},
        },
    }


def cmd_hemisphere_mc(args) -> dict:
    if args.dim < 2 or args.trials < 1:
        raise InvalidInput("need --dim >= 2 and --trials >= 1")
    est = hemisphere_monte_carlo(args.dim, args.trials, rng=args.seed)
    return {
        "result": {
            "dim": args.dim,
            "trials": est.trials,
            "seed": args.seed,
            "hits": est.hits,
            "frequency": est.frequency,
            "standard_error": est.standard_error,
            "expected": 2.0 ** -args.dim,
        }
    }


def cmd_rank2_example(args) -> dict:
    if len(args.angles) != 3:
        raise InvalidInput("need exactly three angles")
    matrix = rank2_equality_example(args.angles, degrees=args.degrees)
    return {
        "result": {
            "matrix": matrix.entries,
            "entrywise_square": entrywise_square(matrix).entries,
            "tensor_bound": _tensor_payload(tensor_bound_check(matrix, args.tol), args.tol),
        }
    }


COMMANDS = {
    "mag": cmd_mag,
    "certify": cmd_certify,
    "profile": cmd_profile,
    "negative-type": cmd_negative_type,
    "spread": cmd_spread,
    "bounds": cmd_bounds,
    "hemisphere-mc": cmd_hemisphere_mc,
    "rank2-example": cmd_rank2_example,
}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (UsageError, InvalidInput)):
        return EXIT_INPUT
    if isinstance(exc, NoWeighting):
        return EXIT_NO_WEIGHTING
    if isinstance(exc, NumericalFailure):
        return EXIT_NUMERICAL
    if isinstance(exc, HypothesisError):
        return EXIT_HYPOTHESIS
    return EXIT_NUMERICAL


def _fail(exc: BaseException, fmt: str, stderr) -> int:
    code = _exit_code(exc)
    if fmt == "structured":
        err = {"tool": "maggeom", "version": __version__, "error": type(exc).__name__,
               "message": str(exc), "exit_code": code}
        print(render_structured(err), file=stderr)
    else:
        print(f"maggeom: error: {exc}", file=stderr)
    return code


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    fmt = "structured" if "structured" in argv else "human"
    try:
        args = build_parser().parse_args(argv)
        fmt = args.format
        if os.environ.get(TOL_ENV):
            try:
                args.tol = _positive(os.environ[TOL_ENV])
            except (ValueError, argparse.ArgumentTypeError):
                raise UsageError(f"${TOL_ENV} must be a positive number") from None
        body = COMMANDS[args.command](args)
    except (UsageError, MaggeomError) as exc:
        return _fail(exc, fmt, stderr)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(NumericalFailure(str(exc)), fmt, stderr)
    except ValueError as exc:
        return _fail(InvalidInput(str(exc)), fmt, stderr)

    params = {key: value for key, value in sorted(vars(args).items()) if key not in ("command", "format", "input")}
    doc = {
        "tool": "maggeom",
        "version": __version__,
        "command": args.command,
        "arguments": params,
        "input": getattr(args, "input", None),
        "input_digest": body.get("input_digest"),
        "result": body["result"],
    }
    doc = to_jsonable(doc)
    print(render_structured(doc) if fmt == "structured" else render_human(doc), file=stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
