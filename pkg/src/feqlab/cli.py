"""Command-line front end: group catalog, solver/completeness runs,
exact-pair audits, perturbation, and ball-family stability experiments.

Conventions shared by all subcommands:

* a flat ``key = value`` config file (``--config``) can supply any flag;
  explicitly passed flags win;
* floating-point output is printed with 17 significant digits, and the same
  config plus seed yields byte-identical output;
* exit codes: 0 pass, 2 check mismatch/failure, 3 flagged numerical
  ambiguity, 4 invalid configuration;
* ``FEQLAB_THREADS`` caps worker threads in the Newton sweeps.
"""

import argparse
import os
import sys

import numpy as np

from .families import (FamilyConstructionError, SolutionPair,
                       canned_half_trace, family_case_iv)
from .feq import (read_function, residual_wilson, write_function,
                  zero_tolerance)
from .groups import (CATALOG_NAMES, BallDomain, DiscreteHeisenberg, FreeGroup,
                     IntegerLattice, build_catalog_group)
from .morphisms import (AdditiveMap, ball_character, ball_involution,
                        enumerate_characters, enumerate_involutions,
                        identity_involution, inversion_involution,
                        read_character)
from .solver import (AuditNotApplicable, candidate_gs, completeness_check,
                     solve_f_given_g, theorem22_audit)
from .stability import (PerturbationConfig, dichotomy_experiment, perturb,
                        run_stability_battery)

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_AMBIGUOUS = 3
EXIT_BADCONFIG = 4

DEFAULT_RADII = {"lattice:1": "4,8,12,16", "lattice:2": "2,4,6,8",
                 "heisenberg": "1,2,3", "free:2": "1,2,3"}


class CliError(Exception):
    """Invalid configuration; maps to exit code 4."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_BADCONFIG)


def _fmt(x):
    return f"{x:.17g}"


def _fmt_c(z):
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}j"


def _load_config(path):
    table = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected key = value")
                key, _, value = line.partition("=")
                table[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from None
    return table


def _merge_config(args):
    """Fill unset flags (None) from the config file; flags keep priority."""
    if not getattr(args, "config", None):
        return
    table = _load_config(args.config)
    known = vars(args)
    for key, value in table.items():
        if key not in known:
            raise CliError(f"unknown config key {key!r}")
        if known[key] is None:
            setattr(args, key, value)


def _get(args, key, default=None, cast=str):
    raw = getattr(args, key, None)
    if raw is None:
        return default
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad value for --{key.replace('_', '-')}: {exc}") from None


def _resolve_group(spec):
    if spec is None:
        raise CliError("--group is required")
    try:
        return build_catalog_group(spec)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _resolve_sigma(G, spec):
    spec = spec or "id"
    if spec in ("id", "identity"):
        return identity_involution(G)
    if spec in ("inv", "inversion"):
        return inversion_involution(G)
    for prefix, kind in (("auto:", "automorphism"), ("anti:", "anti-automorphism")):
        if spec.startswith(prefix):
            idx = int(spec[len(prefix):])
            found = enumerate_involutions(G, kind)
            if not 0 <= idx < len(found):
                raise CliError(f"{kind} index {idx} out of range "
                               f"(found {len(found)})")
            return found[idx]
    raise CliError(f"unknown sigma selector {spec!r}")


def _compat_witness(G, sigma, chi):
    """First x with chi(x sigma(x)) != 1, or None when compatible."""
    if chi.angles is not None:
        for x in range(G.n):
            if (chi.angles[x] + chi.angles[sigma(x)]) % 1 != 0:
                return x, complex(chi.values[x] * chi.values[sigma(x)])
        return None
    prod = chi.values * chi.values[sigma.table]
    bad = np.abs(prod - 1.0) > 1e-12
    if bad.any():
        x = int(np.flatnonzero(bad)[0])
        return x, complex(prod[x])
    return None


def _resolve_chi(G, sigma, args):
    path = getattr(args, "chi_file", None)
    if path:
        try:
            chi = read_character(path, G)
        except (OSError, ValueError) as exc:
            raise CliError(f"bad character file: {exc}") from None
    else:
        chars = enumerate_characters(G)
        idx = _get(args, "chi", 0, int)
        if not 0 <= idx < len(chars):
            raise CliError(f"character index {idx} out of range "
                           f"(group has {len(chars)})")
        chi = chars[idx]
    witness = _compat_witness(G, sigma, chi)
    if witness is not None:
        x, val = witness
        raise CliError(
            f"chi is incompatible with sigma: chi(x sigma(x)) = {_fmt_c(val)} "
            f"!= 1 at element {x}")
    return chi


def _angles_str(chi):
    if chi.angles is None:
        return " ".join(_fmt_c(v) for v in chi.values)
    return " ".join(str(t) for t in chi.angles)


# --- subcommands ----------------------------------------------------------


def cmd_catalog(args):
    group = getattr(args, "group", None)
    if group is None:
        print("supported groups:")
        for name in CATALOG_NAMES:
            print(f"  {name} order {build_catalog_group(name).order}")
        print("ball domains: lattice:<d>, heisenberg, free:<rank>")
        return EXIT_OK
    G = _resolve_group(group)
    print(f"group {G.name} order {G.order}")
    if getattr(args, "morphisms", False):
        for kind in ("automorphism", "anti-automorphism"):
            found = enumerate_involutions(G, kind)
            print(f"involutive {kind}s {len(found)}")
            for i, s in enumerate(found):
                label = s.label or "-"
                print(f"  {kind[:4]}:{i} {label} " +
                      " ".join(str(v) for v in s.table))
    if getattr(args, "characters", False):
        chars = enumerate_characters(G)
        print(f"characters {len(chars)}")
        for i, chi in enumerate(chars):
            print(f"  chi:{i} angles {_angles_str(chi)}")
    return EXIT_OK


def cmd_solve(args):
    G = _resolve_group(args.group)
    sigma = _resolve_sigma(G, args.sigma)
    if sigma.kind != "automorphism":
        raise CliError("completeness solving needs an automorphism sigma")
    chi = _resolve_chi(G, sigma, args)
    tol = _get(args, "tol", 1e-9, float)
    report = completeness_check(G, sigma, chi, tol=tol)
    sys.stdout.write(report.table())
    for row in report.rows:
        print(f"  g {row.g_label} solver_dim {row.solver_dim} "
              f"family_dim {row.family_dim} mismatch {_fmt(row.max_mismatch)}"
              + (" AMBIGUOUS" if row.ambiguous else ""))
    out_dir = getattr(args, "out_dir", None)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "completeness.txt"), "w",
                  encoding="utf-8") as fh:
            fh.write(report.table())
        for k, (_, g, _ms) in enumerate(candidate_gs(G, sigma, chi)):
            write_function(g, os.path.join(out_dir, f"g_{k:03d}.txt"))
            res = solve_f_given_g(G, sigma, chi, g)
            for j, b in enumerate(res.basis):
                write_function(b, os.path.join(out_dir, f"f_{k:03d}_{j:02d}.txt"))
    if report.any_ambiguous:
        return EXIT_AMBIGUOUS
    if not report.passed:
        return EXIT_MISMATCH
    return EXIT_OK


def _exact_pairs_for_audit(G, sigma, chi):
    """(label, f, g) for every solver-found pair with f != 0, plus the
    canned half-trace candidate when the group has one."""
    tol = zero_tolerance(G)
    gs = [(f"g{k}", g) for k, (_, g, _m) in enumerate(candidate_gs(G, sigma, chi))]
    half = canned_half_trace(G)
    if half is not None:
        rep = residual_wilson(G, sigma, chi, half, half)
        if rep.sup <= tol and not any(
                np.abs(g.values - half.values).max() <= 1e-9 for _, g in gs):
            gs.append(("half-trace", half))
    out = []
    for label, g in gs:
        res = solve_f_given_g(G, sigma, chi, g)
        for j, f in enumerate(res.basis):
            rep = residual_wilson(G, sigma, chi, f, g)
            if rep.sup <= tol:
                out.append((f"{label}:f{j}", f, g))
    return out


def cmd_audit(args):
    G = _resolve_group(args.group)
    sigma = _resolve_sigma(G, args.sigma)
    chi = _resolve_chi(G, sigma, args)
    tol = _get(args, "tol", 1e-10, float)
    f_path, g_path = getattr(args, "f", None), getattr(args, "g", None)
    if (f_path is None) != (g_path is None):
        raise CliError("--f and --g must be given together")
    if f_path:
        try:
            pairs = [("file", read_function(G, f_path), read_function(G, g_path))]
        except (OSError, ValueError) as exc:
            raise CliError(f"bad function file: {exc}") from None
    else:
        pairs = _exact_pairs_for_audit(G, sigma, chi)
    if not pairs:
        print("no exact pairs with f != 0 found")
        return EXIT_OK
    all_pass = True
    out_lines = []
    for label, f, g in pairs:
        try:
            report = theorem22_audit(G, sigma, chi, f, g, tol=tol)
        except AuditNotApplicable as why:
            raise CliError(f"audit not applicable: {why}") from None
        out_lines.append(f"pair {label}: "
                         f"{'PASS' if report.passed else 'FAIL'}")
        out_lines.append(report.table().rstrip("\n"))
        all_pass &= report.passed
    text = "\n".join(out_lines) + "\n"
    sys.stdout.write(text)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK if all_pass else EXIT_MISMATCH


def _ball_kind(spec):
    spec = spec or "lattice:2"
    if spec.startswith("lattice:"):
        return IntegerLattice(int(spec.split(":", 1)[1])), spec
    if spec == "heisenberg":
        return DiscreteHeisenberg(), spec
    if spec.startswith("free:"):
        return FreeGroup(int(spec.split(":", 1)[1])), spec
    raise CliError(f"unknown ball domain {spec!r}")


def _parse_radii(args, domain_key):
    raw = getattr(args, "radii", None) or DEFAULT_RADII.get(domain_key, "2,4,6,8")
    try:
        radii = sorted({int(tok) for tok in raw.split(",") if tok.strip()})
    except ValueError as exc:
        raise CliError(f"bad --radii: {exc}") from None
    if not radii or radii[0] < 1:
        raise CliError("radii must be positive integers")
    return radii


def _parse_zs(args, k):
    raw = getattr(args, "chi_z", None)
    if raw is None:
        return [1.0 + 0.0j] * k
    try:
        zs = [complex(tok) for tok in raw.split(",")]
    except ValueError as exc:
        raise CliError(f"bad --chi-z: {exc}") from None
    if len(zs) != k:
        raise CliError(f"--chi-z needs {k} comma-separated values")
    return zs


def _ball_exact_pair(ball, sigma, chi, zs):
    """A mixed-character exact pair on the ball: m with m = chi m o sigma
    (square roots of the chi bases under inversion), f = (a + 1) m with the
    first-coordinate additive map when sigma is inversion, f = m otherwise."""
    k = len(zs)
    if sigma.is_inversion and not sigma.is_identity:
        m = ball_character(ball, [np.sqrt(complex(z)) for z in zs])
        coeffs = np.zeros(k)
        coeffs[0] = 1.0
        additive = AdditiveMap(ball, coeffs)
    elif sigma.is_identity:
        if any(complex(z) != 1.0 + 0.0j for z in zs):
            raise CliError("sigma = id admits this pair only for trivial chi")
        m = ball_character(ball, [1.0] * k)
        additive = None
    else:
        raise CliError("no canned exact pair for this sigma")
    from .morphisms import MultiplicativeFunction
    mm = MultiplicativeFunction.from_character(m)
    try:
        return family_case_iv(mm, chi, sigma, additive, 1.0)
    except FamilyConstructionError as exc:
        raise CliError(str(exc)) from None


def cmd_perturb(args):
    domain_spec = getattr(args, "domain", None)
    eps = _get(args, "epsilon", None, float)
    if eps is None:
        raise CliError("--epsilon is required")
    config = PerturbationConfig(
        epsilon=eps,
        seed=_get(args, "seed", 42, int),
        shape=_get(args, "shape", "uniform-disk"),
        target=_get(args, "target", "both"),
        point=_get(args, "point", 0, int),
    )
    if domain_spec and (domain_spec.startswith(("lattice:", "free:"))
                        or domain_spec == "heisenberg"):
        kind, key = _ball_kind(domain_spec)
        radius = _get(args, "radius", 4, int)
        ball = BallDomain(kind, radius)
        sigma = ball_involution(ball, getattr(args, "sigma", None) or "inv")
        k = len(kind.abelian_coords(ball.elements[0]))
        zs = _parse_zs(args, k)
        chi = ball_character(ball, zs)
        pair = _ball_exact_pair(ball, sigma, chi, zs)
    else:
        G = _resolve_group(getattr(args, "group", None) or domain_spec)
        sigma = _resolve_sigma(G, getattr(args, "sigma", None))
        chi = _resolve_chi(G, sigma, args)
        pairs = _exact_pairs_for_audit(G, sigma, chi)
        if not pairs:
            raise CliError("no exact pair with f != 0 available to perturb")
        label, f, g = pairs[0]
        pair = SolutionPair(f, g, "External", sigma=sigma, chi=chi)
    result = perturb(pair, config)
    print(f"measured_delta {_fmt(result.measured_delta)}")
    prefix = getattr(args, "out_prefix", None)
    if prefix:
        write_function(result.f, prefix + "_f.txt")
        write_function(result.g, prefix + "_g.txt")
    return EXIT_OK


def cmd_stability(args):
    kind, key = _ball_kind(getattr(args, "domain", None))
    radii = _parse_radii(args, key)
    max_ball = BallDomain(kind, radii[-1])
    sigma_spec = getattr(args, "sigma", None) or "inv"
    sigma = ball_involution(max_ball, sigma_spec)
    k = len(kind.abelian_coords(max_ball.elements[0]))
    zs = _parse_zs(args, k)
    chi = ball_character(max_ball, zs)
    if not chi.unitary:
        raise CliError("stability audits need a unitary chi (|z| = 1)")
    pair = _ball_exact_pair(max_ball, sigma, chi, zs)
    config = PerturbationConfig(
        epsilon=_get(args, "epsilon", 1e-2, float),
        seed=_get(args, "seed", 42, int),
        shape=_get(args, "shape", "uniform-disk"),
        target=_get(args, "target", "both"),
        point=_get(args, "point", 0, int),
    )
    result = perturb(pair, config)
    report = run_stability_battery(max_ball, sigma, chi, result.f, result.g,
                                   result.measured_delta,
                                   a=_get(args, "a", max_ball.identity, int))
    print(f"measured_delta {_fmt(result.measured_delta)}")
    sys.stdout.write(report.table())
    f_map = {el: result.f.values[i] for i, el in enumerate(max_ball.elements)}
    g_map = {el: result.g.values[i] for i, el in enumerate(max_ball.elements)}
    scan = dichotomy_experiment(kind, radii, f_map.__getitem__,
                                g_map.__getitem__, preset="WilsonVariant",
                                sigma_spec=sigma_spec, chi_zs=zs)
    report.growth_rows = scan.growth_rows
    csv_text = report.csv()
    out = getattr(args, "csv_out", None)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK if report.passed else EXIT_MISMATCH


# --- parser wiring --------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--group", help="catalog group name, e.g. Z4, S3, Q8")
    p.add_argument("--sigma", help="id, inv, auto:K, or anti:K")
    p.add_argument("--chi", help="character index (enumeration order)")
    p.add_argument("--chi-file", dest="chi_file", help="explicit character file")
    p.add_argument("--tol", help="tolerance override")


def build_parser():
    parser = _Parser(prog="feqlab",
                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list groups, involutions, characters")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--group")
    p.add_argument("--morphisms", action="store_true")
    p.add_argument("--characters", action="store_true")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("solve", help="nullspace solver + completeness check")
    _add_common(p)
    p.add_argument("--out-dir", dest="out_dir", help="write solution files here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("audit", help="exact-pair structure audit")
    _add_common(p)
    p.add_argument("--f", help="f function file (with --g)")
    p.add_argument("--g", help="g function file (with --f)")
    p.add_argument("--out", help="write the audit table here")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("perturb", help="perturb an exact pair, report delta")
    _add_common(p)
    p.add_argument("--domain", help="lattice:<d>, heisenberg, free:<k>, or group")
    p.add_argument("--radius", help="ball radius (ball domains)")
    p.add_argument("--chi-z", dest="chi_z", help="comma list of character bases")
    p.add_argument("--epsilon")
    p.add_argument("--seed")
    p.add_argument("--shape")
    p.add_argument("--target")
    p.add_argument("--point")
    p.add_argument("--out-prefix", dest="out_prefix")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("stability",
                       help="perturb + inequality audits + dichotomy CSV")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--domain", help="lattice:<d>, heisenberg, free:<k>")
    p.add_argument("--radii", help="comma list, e.g. 2,4,6,8")
    p.add_argument("--sigma", help="id or inv")
    p.add_argument("--chi-z", dest="chi_z", help="comma list of character bases")
    p.add_argument("--epsilon")
    p.add_argument("--seed")
    p.add_argument("--shape")
    p.add_argument("--target")
    p.add_argument("--point")
    p.add_argument("--a", help="base point id for the section audits")
    p.add_argument("--csv-out", dest="csv_out")
    p.set_defaults(func=cmd_stability)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BADCONFIG
    except FamilyConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BADCONFIG


if __name__ == "__main__":
    sys.exit(main())
