"""Command line entry point: ``fibrations <module> <verb> [flags]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from . import fixtures


class CliError(Exception):
    pass


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}") from None


def _input(args, default_fixture: str, parse: Callable[[dict], Any]):
    if getattr(args, "input", None):
        return parse(_load_json(args.input))
    return fixtures.load(args.fixture or default_fixture)


def _matrix(text: str) -> list[list[int]]:
    try:
        m = json.loads(text)
    except json.JSONDecodeError:
        raise CliError(f"matrix must be JSON, e.g. [[1,0],[0,1]]; got {text!r}") from None
    if not (isinstance(m, list) and all(isinstance(r, list) for r in m)):
        raise CliError("matrix must be a list of rows")
    return m


def _vector(text: str) -> list[str]:
    return [t.strip() for t in text.strip("()[] ").split(",") if t.strip()]


class Output:
    def __init__(self, args):
        self.json = args.json
        self.data: dict[str, Any] = {}
        self.lines: list[str] = []

    def put(self, key: str, value: Any, text: str | None = None):
        self.data[key] = value
        self.lines.append(text if text is not None else f"{key}: {value}")

    def emit(self):
        if self.json:
            print(json.dumps(self.data, indent=2, default=str))
        else:
            print("\n".join(self.lines))


def _svg_path(args) -> str | None:
    return getattr(args, "svg", None)


# -- complex ---------------------------------------------------------------

def cmd_complex(args, out: Output) -> bool:
    from .complex import (SncPresentation, betti_table, build_dual_complex, check_maximal_intersection,
                          cone)
    p = _input(args, "k4", SncPresentation.from_dict)
    d = build_dual_complex(p)
    if args.verb == "build":
        out.put("f_vector", list(d.f_vector))
        out.put("euler_characteristic", d.euler_characteristic())
        out.put("maximal_intersection", check_maximal_intersection(p))
        out.put("complex", d.to_dict(), "cells: " + ", ".join(d.label(i) for i in range(len(d.cells))))
        if _svg_path(args):
            from .plotting import render_complex
            render_complex(d, args.svg)
            out.put("svg", args.svg)
        return True
    if args.verb == "betti":
        table = betti_table(d)
        out.put("betti", table)
        ok = True
        if args.h0 is not None:
            top = table[p.n - 1] if p.n - 1 < len(table) else 0
            ok = top == args.h0
            out.put("h0_matches", ok, f"b_{p.n - 1} = {top} vs supplied h0 = {args.h0}: "
                                      f"{'match' if ok else 'MISMATCH'}")
        return ok
    c = cone(d)
    out.put("strata", len(c.strata))
    out.put("dimension", c.dimension)
    out.put("euler_characteristic", c.euler_characteristic())
    out.put("cone", c.to_dict(), "strata: " + ", ".join(f"{lab} (dim {dim})" for dim, lab in c.strata))
    return c.euler_characteristic() == 1


# -- atlas -----------------------------------------------------------------

def cmd_atlas(args, out: Output) -> bool:
    from ._intmat import as_matrix
    from .atlas import (AffineAtlas, LoopWord, check_duality, cycle_generator_loop, find_conjugator,
                        monodromy_lagr, monodromy_nonarch)
    a = _input(args, "cubic-atlas", AffineAtlas.from_dict)
    loop = LoopWord.parse(args.loop) if args.loop else cycle_generator_loop(a)
    if args.base:
        cells = list(loop.cells[:-1])
        if args.base not in cells[::2]:
            raise CliError(f"base {args.base} is not a star cell on the loop")
        k = cells.index(args.base)
        loop = LoopWord(tuple(cells[k:] + cells[:k] + [args.base]))
    nonarch = monodromy_nonarch(a, loop)
    lagr = monodromy_lagr(a, loop)
    dual = check_duality(a, loop)
    out.put("loop", list(loop.cells), "loop: " + ",".join(loop.cells))
    out.put("rho_nonarch", [list(r) for r in nonarch])
    out.put("rho_lagr", [list(r) for r in lagr])
    out.put("duality", dual)
    ok = dual
    if args.conjugate_to:
        target = as_matrix(_matrix(args.conjugate_to))
        witness = find_conjugator(lagr, target, bound=args.bound)
        out.put("conjugator", [list(r) for r in witness] if witness else None)
        ok = ok and witness is not None
    return ok


# -- atbd ------------------------------------------------------------------

def _diagram(args):
    from .atbd import AlmostToricDiagram2D, BaseDiagram3D, facet_extract
    if getattr(args, "facet", None):
        d3 = BaseDiagram3D.from_dict(_load_json(args.input)) if args.input else \
            fixtures.load(args.fixture or "negative-vertex-3d")
        return facet_extract(d3, args.facet)
    return _input(args, "paper-quadrilateral", AlmostToricDiagram2D.from_dict)


def _describe(d, out: Output, key: str = "diagram"):
    out.put(key, d.to_dict(), f"{key}: " + " ".join(f"({','.join(str(x) for x in p)})" for p in d.polygon))
    s = d.lattice_stats()
    out.put("lattice_stats", {"area": str(s.area), "interior": s.interior, "boundary": s.boundary},
            f"area {s.area}, interior {s.interior}, boundary {s.boundary}, Pick {s.pick_holds()}")


def cmd_atbd(args, out: Output) -> bool:
    from .atbd import BaseDiagram3D, check_edge_colinearity, facet_extract, find_agl_transform, mutate, shear
    if args.verb == "check":
        if args.against:
            from .atbd import AlmostToricDiagram2D
            a = _diagram(args)
            b = AlmostToricDiagram2D.from_dict(_load_json(args.against)) if Path(args.against).exists() \
                else fixtures.load(args.against)
            tr = find_agl_transform(a, b, bound=args.bound)
            out.put("transform", tr.to_dict() if tr else None)
            return tr is not None
        d3 = BaseDiagram3D.from_dict(_load_json(args.input)) if args.input else \
            fixtures.load(args.fixture or "negative-vertex-3d")
        checks = {"B'12->B12 (upper)": check_edge_colinearity(d3, "B'12", "B12", "upper"),
                  "B'14->B14 (lower)": check_edge_colinearity(d3, "B'14", "B14", "lower")}
        out.put("straight_edges", checks)
        facets = {}
        for name in list(d3.facets) + list(d3.glued_facets):
            f = facet_extract(d3, name)
            facets[name] = {"vertices": [[str(x) for x in p] for p in f.polygon],
                            "edge_lengths": f.edge_lengths(), "nodes": len(f.nodes)}
        out.put("facets", facets, "\n".join(f"{k}: lengths {v['edge_lengths']}, {v['nodes']} node(s)"
                                             for k, v in facets.items()))
        return all(checks.values())
    d = _diagram(args)
    if args.verb == "mutate":
        d = mutate(d, args.node)
    elif args.verb == "shear":
        d = shear(d, _matrix(args.matrix), _vector(args.translation))
    _describe(d, out)
    if _svg_path(args) or args.verb == "render":
        from .plotting import render_diagram
        if not _svg_path(args):
            raise CliError("render needs --svg PATH")
        render_diagram(d, args.svg)
        out.put("svg", args.svg)
    return d.lattice_stats().pick_holds()


# -- negvertex -------------------------------------------------------------

def cmd_negvertex(args, out: Output) -> bool:
    from .negvertex import NegVertexConfig, critical_points, flow_trace, hessian_eigenvalues
    kw = {"c": args.c}
    if args.tol is not None:
        kw["residual_tol"] = args.tol
    cfg = NegVertexConfig(**kw)
    if args.verb == "critical-points":
        rep = critical_points(cfg)
        h = hessian_eigenvalues(cfg, rep)
        data = rep.to_dict()
        data["hessian"] = h.to_dict()
        out.put("report", data, "\n".join([
            f"c = {cfg.c}",
            f"a(c) = {rep.a:.15g}, b(c) = {rep.b:.15g}",
            f"R(c) = {rep.R:.15g}, circle radius = {rep.circle_radius:.15g}",
            f"P1 = (0, 0, -1/2, -1/2), multipliers {rep.multipliers['P1']}",
            f"P2 = (0, 0, {rep.P2.u1.real:.12g}, {rep.P2.u2.real:.12g}), multipliers {rep.multipliers['P2']}",
            f"P3 = (0, 0, {rep.P3.u1.real:.12g}, {rep.P3.u2.real:.12g})",
            f"Phi = pi solutions: {len(rep.phi_pi_solutions)} (discriminant {rep.phi_pi_discriminant:.6g})",
            f"max residual {rep.max_residual:.3g}, Hessian normal-positive: {h.ok}",
        ]))
        return rep.ok and h.ok
    if args.verb == "amoeba":
        from .negvertex import amoeba_sample, in_amoeba
        pts = amoeba_sample(args.resolution)
        inside = bool(in_amoeba(pts[:, 0], pts[:, 1], 1e-9).all())
        out.put("samples", len(pts))
        out.put("all_in_amoeba", inside)
        if _svg_path(args):
            from .plotting import render_amoeba
            render_amoeba(cfg, args.svg, args.resolution)
            out.put("svg", args.svg)
        return inside
    start = [float(x) for x in _vector(args.start)]
    tr = flow_trace(start, cfg, upper=not args.lower)
    out.put("flow", {k: v for k, v in tr.to_dict().items() if k != "points" or args.json},
            f"{len(tr.points)} steps, endpoint {tr.points[-1].tolist()}, nearest {tr.nearest} "
            f"at distance {tr.distance:.3g}")
    return tr.converged


# -- group -----------------------------------------------------------------

def cmd_group(args, out: Output) -> bool:
    from .groups import (FreeWord, Presentation, abelianization, check_snf, conjugate_power_search,
                         is_proper_power, smith_normal_form)
    if args.verb == "power":
        w = FreeWord.parse(args.word)
        res = is_proper_power(w)
        out.put("word", str(w))
        out.put("proper_power", None if res is None else {"root": str(res[0]), "k": res[1]},
                "not a proper power" if res is None else f"{res[0]}^{res[1]}")
        return True
    if args.verb == "snf":
        snf = smith_normal_form(_matrix(args.matrix))
        out.put("D", [list(r) for r in snf.D])
        out.put("U", [list(r) for r in snf.U])
        out.put("V", [list(r) for r in snf.V])
        out.put("diagonal", list(snf.diagonal))
        ok = check_snf(snf)
        out.put("verified", ok)
        return ok
    if args.verb == "abelianize":
        rels = [r for r in (args.relators or "").split(",") if r.strip()]
        ab = abelianization(Presentation.parse(args.gens, rels))
        out.put("abelianization", {"free_rank": ab.free_rank, "torsion": list(ab.torsion)}, str(ab))
        return True
    res = conjugate_power_search(FreeWord.parse(args.word), FreeWord.parse(args.c), args.max_length)
    out.put("search", {"found": res.found, "h": str(res.h) if res.h is not None else None, "k": res.k,
                       "max_length": res.max_length, "inconclusive": res.inconclusive},
            f"witness h = {res.h}, k = {res.k}" if res.found
            else f"no witness with |h| <= {res.max_length} (inconclusive)")
    return True


# -- evalmap ---------------------------------------------------------------

def cmd_evalmap(args, out: Output) -> bool:
    import itertools

    from .evalmap import LocalModel, export_csv, fullness_check, neighbourhood_sample, poisson_check
    m = LocalModel(args.n, args.eps, args.eps_prime)
    tol = args.tol if args.tol is not None else 1e-6
    pc = poisson_check(m, neighbourhood_sample(m, args.points, args.seed))
    out.put("poisson", pc.to_dict(), f"Poisson max {pc.max_residual:.3g}, control {pc.control:.6f}")
    ok = pc.max_residual < tol and abs(pc.control - 1) <= 0.01
    reports = {}
    for r in range(1, args.n + 1):
        for J in itertools.combinations(range(args.n), r):
            rep = fullness_check(m, J, args.resolution, args.samples, args.seed)
            reports["".join(str(j + 1) for j in J)] = rep.to_dict()
            ok &= rep.open_cell
    full = reports["".join(str(j + 1) for j in range(args.n))]
    out.put("fullness", reports, f"coverage of the top cell: {full['coverage']:.4f} "
                                 f"({full['hit']}/{full['total']})")
    if args.csv:
        from .evalmap import open_stratum_sample
        export_csv(m, open_stratum_sample(m, range(args.n), args.samples, args.seed), args.csv)
        out.put("csv", args.csv)
    return bool(ok)


# -- verify / render -------------------------------------------------------

def cmd_verify(args, out: Output) -> bool:
    from .verify import verify_paper
    overrides = {}
    for item in args.override or []:
        name, _, path = item.partition("=")
        if name not in fixtures.names():
            raise CliError(f"unknown fixture {name!r}")
        overrides[name] = _load_json(path)
    rep = verify_paper(overrides, seed=args.seed)
    out.put("ok", rep.ok, None)
    out.put("items", [i.to_dict() for i in rep.items], "\n".join(rep.lines()))
    return rep.ok


def cmd_render(args, out: Output) -> bool:
    from . import plotting
    path = args.svg
    if not path:
        raise CliError("render needs --svg PATH")
    if args.what == "complex":
        from .complex import SncPresentation, build_dual_complex
        plotting.render_complex(build_dual_complex(_input(args, "k4", SncPresentation.from_dict)), path)
    elif args.what == "amoeba":
        from .negvertex import NegVertexConfig
        plotting.render_amoeba(NegVertexConfig(c=args.c), path, args.resolution)
    else:
        plotting.render_diagram(_diagram(args), path)
    out.put("svg", path)
    return True


def cmd_fixture(args, out: Output) -> bool:
    if args.name is None:
        out.put("fixtures", fixtures.names(), "\n".join(fixtures.names()))
    else:
        out.put(args.name, fixtures.load(args.name).to_dict(), json.dumps(fixtures.load(args.name).to_dict()))
    return True


# -- parser ----------------------------------------------------------------

def _globals(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    parser.add_argument("--svg", default=d(None), metavar="PATH", help="also write an SVG figure")
    parser.add_argument("--seed", type=int, default=d(0), help="seed for sampling (default 0)")
    parser.add_argument("--tol", type=float, default=d(None), help="override the check tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fibrations", description=__doc__)
    _globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)
    sub = parser.add_subparsers(dest="module", required=True)

    def source(p, fixture_help):
        p.add_argument("--input", metavar="FILE", help="JSON input")
        p.add_argument("--fixture", help=fixture_help)

    cx = sub.add_parser("complex", help="dual complexes and cones").add_subparsers(dest="verb", required=True)
    for verb in ("build", "betti", "cone"):
        p = cx.add_parser(verb, parents=[common])
        source(p, "bundled presentation (default k4)")
        if verb == "betti":
            p.add_argument("--h0", type=int, help="supplied h^0(X, K_X + Y) to compare with b_{n-1}")
        p.set_defaults(func=cmd_complex)

    at = sub.add_parser("atlas", help="affine atlases").add_subparsers(dest="verb", required=True)
    p = at.add_parser("monodromy", parents=[common])
    source(p, "bundled atlas (default cubic-atlas)")
    p.add_argument("--loop", help="comma separated cells K0,L1,K2,...,K0")
    p.add_argument("--base", help="rotate the loop to start at this star cell")
    p.add_argument("--conjugate-to", help="search a GL(n,Z) conjugator to this matrix (JSON)")
    p.add_argument("--bound", type=int, default=5, help="entry bound for the conjugator search")
    p.set_defaults(func=cmd_atlas)

    ab = sub.add_parser("atbd", help="almost toric base diagrams").add_subparsers(dest="verb", required=True)
    for verb in ("mutate", "shear", "check", "render"):
        p = ab.add_parser(verb, parents=[common])
        source(p, "bundled diagram")
        p.add_argument("--facet", help="extract this facet of a 3D diagram first")
        if verb == "mutate":
            p.add_argument("--node", type=int, default=0)
        if verb == "shear":
            p.add_argument("--matrix", required=True, help="unimodular 2x2 matrix as JSON")
            p.add_argument("--translation", default="0,0")
        if verb == "check":
            p.add_argument("--against", help="2D diagram (file or fixture) to test AGL(2,Z) equivalence with")
            p.add_argument("--bound", type=int, default=6)
        p.set_defaults(func=cmd_atbd)

    nv = sub.add_parser("negvertex", help="negative-vertex critical points").add_subparsers(dest="verb",
                                                                                           required=True)
    for verb in ("critical-points", "amoeba", "flow"):
        p = nv.add_parser(verb, parents=[common])
        p.add_argument("--c", type=float, default=-0.8)
        if verb == "amoeba":
            p.add_argument("--resolution", type=int, default=400)
        if verb == "flow":
            p.add_argument("--start", required=True, help="R1,R2 on the amoeba")
            p.add_argument("--lower", action="store_true", help="lift into the lower half plane")
        p.set_defaults(func=cmd_negvertex)

    gr = sub.add_parser("group", help="free groups and Smith normal form").add_subparsers(dest="verb",
                                                                                         required=True)
    p = gr.add_parser("power", parents=[common])
    p.add_argument("--word", required=True)
    p = gr.add_parser("snf", parents=[common])
    p.add_argument("--matrix", required=True)
    p = gr.add_parser("abelianize", parents=[common])
    p.add_argument("--gens", type=int, default=2)
    p.add_argument("--relators", default="", help="comma separated relator words")
    p = gr.add_parser("conjugate", parents=[common])
    p.add_argument("--word", required=True)
    p.add_argument("--c", required=True, help="the word whose powers are searched")
    p.add_argument("--max-length", type=int, default=6)
    for name in ("power", "snf", "abelianize", "conjugate"):
        gr.choices[name].set_defaults(func=cmd_group)

    ev = sub.add_parser("evalmap", help="evaluation map on local models").add_subparsers(dest="verb",
                                                                                        required=True)
    p = ev.add_parser("check", parents=[common])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--points", type=int, default=1000, help="points for the Poisson check")
    p.add_argument("--resolution", type=int, default=20, help="grid subdivisions per simplex edge")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--eps-prime", type=float, default=None, help="link level (default -n)")
    p.add_argument("--csv", metavar="FILE", help="export sampled points and chi")
    p.set_defaults(func=cmd_evalmap)

    p = sub.add_parser("verify-paper", parents=[common], help="run every bundled check")
    p.add_argument("--override", action="append", metavar="FIXTURE=FILE",
                   help="replace a bundled fixture (repeatable)")
    p.set_defaults(func=cmd_verify, verb=None)

    p = sub.add_parser("render", parents=[common], help="write an SVG figure")
    p.add_argument("what", choices=["complex", "diagram", "facet", "amoeba"])
    source(p, "bundled input")
    p.add_argument("--facet", help="facet name for 'facet'", default=None)
    p.add_argument("--c", type=float, default=-0.8)
    p.add_argument("--resolution", type=int, default=400)
    p.set_defaults(func=cmd_render, verb=None)

    p = sub.add_parser("fixture", parents=[common], help="list or print bundled fixtures")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_fixture, verb=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.module == "render" and args.what == "facet" and not args.facet:
        parser.error("render facet needs --facet NAME")
    out = Output(args)
    try:
        ok = args.func(args, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, ArithmeticError, OSError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    out.emit()
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
