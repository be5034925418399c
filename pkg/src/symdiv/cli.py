"""Command-line front end.

Every command prints JSON (or writes a file) on success and exits 0. Any
failure prints one JSON error record on stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from typing import List, Optional

import numpy as np

from . import cli_io
from .copula import check_dependence_symmetry, dependence_divergence, make_copula, normalized_dependence_index
from .distributions import make_model
from .divergence import (
    check_gll_symmetry,
    check_survival_link_symmetry,
    kl_generic,
    kl_po_null,
    kl_po_pair,
    renyi_po,
)
from .exceptions import InvalidParam, SymdivError
from .fitting import FitConfig
from .links import POLink, PiecewiseUniformLink, PowerLink, real_link

logger = logging.getLogger("symdiv")

_UNIT_LINKS = {"po": POLink, "piecewise_uniform": PiecewiseUniformLink, "power": PowerLink}


def _floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidParam(f"expected comma-separated numbers, got {text!r}") from None


def _model(spec: str):
    """``family:p1,p2`` -> model."""
    family, _, params = spec.partition(":")
    return make_model(family, *(_floats(params) if params else []))


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, default=_jsonable)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def cmd_ingest(args) -> None:
    cfg = cli_io.IngestConfig(path=args.csv)
    data = cli_io.load_survival_csv(cfg)
    _emit({"names": list(data.names), **data.meta}, args.out)


def cmd_eval(args) -> None:
    q_grid = _floats(args.q_grid)
    if args.fit:
        data = cli_io.load_survival_csv(cli_io.IngestConfig(path=args.csv))
        points = None
        if args.point != "median":
            points = [("explicit", _floats(args.point))]
        report = cli_io.run_pipeline(
            data, points, q_grid=q_grid, seed=args.seed, with_js=not args.no_js, fit_config=FitConfig()
        )
    else:
        if args.point != "median":
            raise InvalidParam("--point applies to --fit; fixture tables carry their own prediction points")
        fixture = cli_io.load_subset_fixture(args.fixture or None)
        report = cli_io.run_pipeline(fixture, q_grid=q_grid, seed=args.seed, with_js=not args.no_js)
    if args.out:
        report.save(args.out)
        print(json.dumps({"written": args.out}))
    else:
        print(report.to_json())


def cmd_divergence(args) -> None:
    if args.po is not None:
        x = args.po
        out = {"x": x, "kl_po_null": kl_po_null(x)}
        if args.po_other is not None:
            out["kl_po_pair"] = kl_po_pair(x, args.po_other)
        if args.q != 1.0:
            out["renyi_po"] = renyi_po(float(np.exp(x)), args.q)
        _emit(out, args.out)
        return
    if not (args.model1 and args.model2):
        raise InvalidParam("give --po X or both --model1 and --model2")
    m1, m2 = _model(args.model1), _model(args.model2)
    fwd = kl_generic(m1, m2, args.q)
    rev = kl_generic(m2, m1, args.q)
    _emit({"model1": repr(m1), "model2": repr(m2), "forward": fwd.to_dict(), "reverse": rev.to_dict()}, args.out)


def cmd_symmetry(args) -> None:
    params = _floats(args.params) if args.params else []
    q_grid = _floats(args.q_grid)
    if args.link in _UNIT_LINKS:
        link = _UNIT_LINKS[args.link](*params)
        rep = check_survival_link_symmetry(link, q_grid, args.tol)
    else:
        link = real_link(args.link, *params)
        theta = args.theta if args.theta is not None else link.theta
        if theta is None:
            raise InvalidParam(f"link {args.link!r} needs --theta")
        rep = check_gll_symmetry(link, theta, q_grid, args.tol)
    _emit({"link": repr(link), **rep.to_dict()}, args.out)


def cmd_copula(args) -> None:
    cop = make_copula(args.family, *(_floats(args.params) if args.params else []))
    out = {
        "copula": repr(cop),
        "mutual_information": dependence_divergence(cop, 1.0).value,
        "reverse_kl": dependence_divergence(cop, 1.0, "reverse").value,
        "normalized_index": normalized_dependence_index(cop),
        "symmetry": check_dependence_symmetry(cop, _floats(args.q_grid), args.tol).to_dict(),
    }
    _emit(out, args.out)


def cmd_plot_data(args) -> None:
    params = json.loads(args.params) if args.params else {}
    header, rows = cli_io.emit_plot_data(args.kind, params)
    if args.out:
        cli_io.write_csv(args.out, header, rows)
        print(json.dumps({"written": args.out, "rows": len(rows)}))
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symdiv", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="read a survival CSV and report counts and medians")
    s.add_argument("--csv", help="input CSV (default: shipped PBC snapshot)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("eval", help="evaluate all subsets and build the information tables")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--fixture", nargs="?", const="", default=None, help="stored linear predictors (default mode)")
    mode.add_argument("--fit", action="store_true", help="fit every subset on --csv")
    s.add_argument("--csv", help="input CSV for --fit (default: shipped PBC snapshot)")
    s.add_argument("--point", default="median", help='"median" or comma-separated covariate vector')
    s.add_argument("--q-grid", default="0.5,1,2")
    s.add_argument("--seed", type=int)
    s.add_argument("--no-js", action="store_true", help="skip the Jensen-Shannon quadrature")
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("divergence", help="divergence between two models")
    s.add_argument("--po", type=float, help="log tilt x of a PO pair against the null")
    s.add_argument("--po-other", type=float, help="second log tilt for a PO pair")
    s.add_argument("--model1", help="family:params, e.g. exponential:1")
    s.add_argument("--model2")
    s.add_argument("--q", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_divergence)

    s = sub.add_parser("symmetry", help="check whether a link gives symmetric divergences")
    s.add_argument("--link", required=True, help="po, piecewise_uniform, power, probit, logit, laplace, gumbel, student_t, asymmetric_pw")
    s.add_argument("--params", help="comma-separated link parameters")
    s.add_argument("--theta", type=float, help="shift for real-line links")
    s.add_argument("--q-grid", default="0.5,1,2,3")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--out")
    s.set_defaults(func=cmd_symmetry)

    s = sub.add_parser("copula", help="dependence divergences of a copula")
    s.add_argument("--family", required=True, choices=["independent", "gaussian", "fgm"])
    s.add_argument("--params")
    s.add_argument("--q-grid", default="0.5,1")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--out")
    s.set_defaults(func=cmd_copula)

    s = sub.add_parser("plot-data", help="write the tabular data for a plot")
    s.add_argument("kind")
    s.add_argument("--params", help="JSON object of parameters")
    s.add_argument("--out")
    s.set_defaults(func=cmd_plot_data)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        args.func(args)
    except SymdivError as exc:
        record = {"error": exc.code, "type": type(exc).__name__, "message": str(exc)}
        for attr in ("row", "column"):
            if getattr(exc, attr, None) is not None:
                record[attr] = getattr(exc, attr)
        print(json.dumps(record), file=sys.stderr)
        return 2
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": "io_error" if isinstance(exc, OSError) else "bad_input", "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
