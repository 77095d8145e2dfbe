"""Command line front end.

    logchiral genus          --pair FILE [--ring FILE] [--order N]
    logchiral chiy           --pair FILE [--ring FILE] [--order N]
    logchiral theta          [--order N]
    logchiral check-elliptic --pair FILE [--ring FILE] [--order N]
    logchiral vertex-verify  --suite FILE
    logchiral jets           --pair FILE [--truncation K]

Every command accepts ``--out FILE`` (written atomically) and ``--json``.
Exit status: 0 success, 1 bad input, 2 mathematical failure or a failed check.

Pair files are INI-style::

    [ring]
    generators = h:1
    rules = h^2 = 0
    integrals = h = 1

    [pair]
    dimension = 1
    cotangent_roots = -h, -h
    cotangent_shift = -1
    divisor_classes = -h, -h

    [jets]
    dimension = 2
    divisor_rank = 1

``rules`` and ``integrals`` are ``;``-separated equations; class lists are
``,``-separated linear combinations of ring monomials. ``cotangent_shift``
(a trivial-bundle rank correction) and ``cotangent_negative_roots`` describe
a virtual cotangent class; without them the roots are honest Chern roots.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import tempfile
from fractions import Fraction

from .chow import RingSpec
from .errors import InputError, LogChiralError, MathematicalFailure
from .genus import (
    KClass,
    PairData,
    check_ellipticity,
    chi_y,
    elliptic_genus,
    euler_spec,
)
from .qseries import TruncatedSeries, _as_laurent, g_series, serialize_series, theta_plus, theta_tilde

DEFAULT_ORDER = 10
DEFAULT_TRUNCATION = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


# ---------------------------------------------------------------------------
# configuration files


class _Config:
    """A parsed INI file that remembers where each key sits."""

    def __init__(self, path: str):
        self.path = path
        try:
            with open(path, encoding="utf-8") as fh:
                self.text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
        self.cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
        self.cp.optionxform = str
        try:
            self.cp.read_string(self.text, source=path)
        except configparser.ParsingError as exc:
            line = exc.errors[0][0] if exc.errors else None
            raise InputError(f"{path}: malformed line", line, 1) from None
        except configparser.Error as exc:
            raise InputError(f"{path}: {exc.message}", getattr(exc, "lineno", None)) from None
        self._where = {}
        section = None
        for n, raw in enumerate(self.text.splitlines(), 1):
            s = raw.strip()
            if s.startswith("[") and s.endswith("]"):
                section = s[1:-1].strip()
            elif section and "=" in s and not s.startswith(("#", ";")):
                key = s.split("=", 1)[0].strip()
                col = raw.index("=") + 2
                while col <= len(raw) and raw[col - 1 : col] == " ":
                    col += 1
                self._where[(section, key)] = (n, col)

    def has(self, section: str) -> bool:
        return self.cp.has_section(section)

    def get(self, section: str, key: str, default=None, required: bool = True):
        if self.cp.has_option(section, key):
            return self.cp.get(section, key)
        if default is not None or not required:
            return default
        raise InputError(f"{self.path}: [{section}] needs '{key}'")

    def fail(self, section: str, key: str, message: str):
        line, col = self._where.get((section, key), (None, None))
        raise InputError(f"{self.path}: [{section}] {key}: {message}", line, col)

    def int(self, section: str, key: str, default=None) -> int:
        raw = self.get(section, key, None if default is None else str(default))
        try:
            return int(raw)
        except ValueError:
            self.fail(section, key, f"expected an integer, got {raw!r}")


def _split(text: str, sep: str) -> list:
    return [p.strip() for p in text.replace("\n", " ").split(sep) if p.strip()]


def load_ring(cfg: _Config, dimension: int | None = None) -> RingSpec:
    if not cfg.has("ring"):
        raise InputError(f"{cfg.path}: missing [ring] section")
    dim = cfg.get("ring", "dimension", required=False)
    if dim is not None:
        dimension = cfg.int("ring", "dimension")
    if dimension is None:
        cfg.fail("ring", "dimension", "dimension is not given")
    gens = {}
    for item in _split(cfg.get("ring", "generators"), ","):
        name, _, deg = item.partition(":")
        try:
            gens[name.strip()] = int(deg) if deg else 1
        except ValueError:
            cfg.fail("ring", "generators", f"bad degree in {item!r}")
    rules = []
    for eq in _split(cfg.get("ring", "rules", ""), ";"):
        if "=" not in eq:
            cfg.fail("ring", "rules", f"expected 'monomial = expression', got {eq!r}")
        lhs, rhs = eq.split("=", 1)
        rules.append((lhs.strip(), rhs.strip()))
    integrals = {}
    for eq in _split(cfg.get("ring", "integrals"), ";"):
        if "=" not in eq:
            cfg.fail("ring", "integrals", f"expected 'monomial = value', got {eq!r}")
        lhs, rhs = eq.split("=", 1)
        try:
            integrals[lhs.strip()] = Fraction(rhs.strip())
        except ValueError:
            cfg.fail("ring", "integrals", f"bad value {rhs.strip()!r}")
    try:
        return RingSpec(dimension, gens, rules, integrals, name=cfg.get("ring", "name", "", required=False))
    except InputError as exc:
        if exc.line is None:
            cfg.fail("ring", "rules" if rules else "generators", exc.message)
        raise
    except (ValueError, KeyError) as exc:
        cfg.fail("ring", "rules", f"cannot parse ({exc})")


def _classes(cfg: _Config, ring: RingSpec, key: str) -> list:
    raw = cfg.get("pair", key, "", required=False)
    out = []
    for item in _split(raw, ","):
        try:
            out.append(ring.normal_form(item))
        except (InputError, ValueError, KeyError) as exc:
            cfg.fail("pair", key, f"cannot read class {item!r} ({exc})")
    return out


def load_pair(path: str, ring_path: str | None = None) -> PairData:
    cfg = _Config(path)
    if not cfg.has("pair"):
        raise InputError(f"{path}: missing [pair] section")
    dim = cfg.int("pair", "dimension")
    ring = load_ring(_Config(ring_path) if ring_path else cfg, dim)
    if ring.dimension != dim:
        cfg.fail("pair", "dimension", f"ring has dimension {ring.dimension}")
    roots = _classes(cfg, ring, "cotangent_roots")
    negative = _classes(cfg, ring, "cotangent_negative_roots")
    divisors = _classes(cfg, ring, "divisor_classes")
    shift_raw = cfg.get("pair", "cotangent_shift", required=False)
    cot = None
    if shift_raw is not None or negative:
        shift = cfg.int("pair", "cotangent_shift", 0)
        cot = KClass(tuple(roots), tuple(negative), shift)
        roots = []
    try:
        return PairData(dim, ring, roots, divisors, name=cfg.get("pair", "name", "", required=False),
                        cotangent_class=cot)
    except InputError as exc:
        if exc.line is None:
            cfg.fail("pair", "cotangent_roots", exc.message)
        raise


# ---------------------------------------------------------------------------
# commands


def _series_json(s: TruncatedSeries) -> dict:
    return {
        "order": s.order,
        "coefficients": [
            {str(p): str(c) for p, c in sorted(_as_laurent(x).items())} for x in s.coeffs
        ],
    }


def _cmd_genus(args):
    p = load_pair(_need(args, "pair"), args.ring)
    s = elliptic_genus(p, args.order)
    if args.json:
        return {"command": "genus", "pair": p.name, "series": _series_json(s)}, 0
    return serialize_series(s), 0


def _cmd_chiy(args):
    p = load_pair(_need(args, "pair"), args.ring)
    chi = chi_y(p)
    e = euler_spec(p, max(args.order, 0))
    e0 = _as_laurent(e.coeffs[0]).coefficient(0) if e.coeffs else Fraction(0)
    if args.json:
        return {
            "command": "chiy",
            "pair": p.name,
            "chi_y": {str(k): str(v) for k, v in sorted(chi.items())},
            "euler_q0": str(e0),
            "euler_spec": _series_json(e),
        }, 0
    return f"chi_y: {chi.render()}\neuler_q0: {e0}\n" + "euler_spec:\n" + serialize_series(e), 0


def _cmd_theta(args):
    N = args.order
    tt, tp, gq, gp = theta_tilde(N), theta_plus(N), g_series(N), g_series(N, method="product")
    status = 0 if gq == gp else 2
    if args.json:
        return {
            "command": "theta",
            "theta_tilde": _series_json(tt),
            "theta_plus": _series_json(tp),
            "G": _series_json(gq),
            "routes_agree": status == 0,
        }, status
    text = (
        "[theta_tilde]\n" + serialize_series(tt)
        + "[theta_plus]\n" + serialize_series(tp)
        + "[G]\n" + serialize_series(gq)
        + f"routes_agree: {'yes' if status == 0 else 'no'}\n"
    )
    return text, status


def _cmd_check(args):
    p = load_pair(_need(args, "pair"), args.ring)
    rep = check_ellipticity(elliptic_genus(p, args.order), p.dimension)
    status = 0 if rep.passed else 2
    if args.json:
        disc = None
        if rep.first_discrepancy is not None:
            m, pw, lhs, rhs = rep.first_discrepancy
            disc = {"q": m, "y": pw, "lhs": str(lhs), "rhs": str(rhs)}
        return {
            "command": "check-elliptic",
            "pair": p.name,
            "passed": rep.passed,
            "d": rep.factor_exponent,
            "verified_order": rep.verified_order,
            "first_discrepancy": disc,
        }, status
    return rep.render(), status


def _cmd_vertex(args):
    from .vertex.expr import run_suite

    path = _need(args, "suite")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    rep = run_suite(text)
    status = 0 if rep.passed else 2
    if args.json:
        return {
            "command": "vertex-verify",
            "results": [
                {"line": r.line, "identity": r.text, "passed": r.passed, "d": r.rank,
                 "r": r.localization, "difference": r.difference}
                for r in rep.results
            ],
            "passed": rep.passed,
        }, status
    return rep.render(), status


def _cmd_jets(args):
    from .logjets import (
        assvar_presentation,
        ideal_stability_check,
        log_jet_algebra,
        open_chart_isomorphism,
    )

    cfg = _Config(_need(args, "pair"))
    if not cfg.has("jets"):
        raise InputError(f"{cfg.path}: missing [jets] section")
    d = cfg.int("jets", "dimension")
    r = cfg.int("jets", "divisor_rank", 0)
    if d < 1:
        cfg.fail("jets", "dimension", "must be at least 1")
    if not 0 <= r <= d:
        cfg.fail("jets", "divisor_rank", f"must lie in 0..{d}")
    A = log_jet_algebra(d, r, args.truncation)
    stable = ideal_stability_check(A)
    pres = assvar_presentation(A)
    iso = open_chart_isomorphism(A)
    status = 0 if stable and iso else 2
    if args.json:
        return {
            "command": "jets",
            "presentation": A.render(),
            "ideal_stable": stable,
            "assvar": pres.render().splitlines()[0],
            "weights": {k.split(":")[0]: int(k.split(":")[1]) for k in pres.render().splitlines()[1].split()[1:]},
            "open_chart_isomorphism": iso,
        }, status
    text = (
        A.render()
        + f"ideal_stable: {'true' if stable else 'false'}\n"
        + "assvar: " + pres.render()
        + f"open_chart_isomorphism: {'true' if iso else 'false'}\n"
    )
    return text, status


_COMMANDS = {
    "genus": _cmd_genus,
    "chiy": _cmd_chiy,
    "theta": _cmd_theta,
    "check-elliptic": _cmd_check,
    "vertex-verify": _cmd_vertex,
    "jets": _cmd_jets,
}


def _need(args, name: str) -> str:
    val = getattr(args, name)
    if not val:
        raise InputError(f"{args.command} needs --{name}")
    return val


def write_atomic(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="logchiral", description="Exact computations for log chiral de Rham complexes.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--order", type=int, default=DEFAULT_ORDER, help="q-truncation order N")
    parser.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION, help="jet truncation K")
    parser.add_argument("--pair", help="pair configuration file")
    parser.add_argument("--ring", help="ring configuration file (overrides [ring] of the pair file)")
    parser.add_argument("--suite", help="identity suite file")
    parser.add_argument("--out", help="write the result here instead of stdout")
    parser.add_argument("--json", action="store_true", help="emit JSON")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.order < 0 or args.truncation < 0:
        sys.stderr.write("error: --order and --truncation must be non-negative\n")
        return 1
    try:
        result, status = _COMMANDS[args.command](args)
    except MathematicalFailure as exc:
        sys.stderr.write(f"mathematical failure: {type(exc).__name__}: {exc}\n")
        return 2
    except LogChiralError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    text = json.dumps(result, indent=2, sort_keys=True) + "\n" if args.json else result
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return status


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
