"""Command line front end: ``bordiq <command> ...``.

Exit status is 0 on success, 1 when a verification fails and 2 for unusable input."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .assembler import VerificationError, assemble_step, audit_bordism, cone_supplier, skeleton_descent
from .barcx import FiniteGroup, GroupAxiomError
from .kernel import (Cell, Facet, SimplicialCellComplex, SimplicialComplex, StructureError, complexity,
                     verify_closed_manifold)
from .maps import Cocycle, InvalidCocycleError, from_cocycle, validate
from .rho import (DomainError, bordism_rho_bound, commutator_genus_bound, connected_sum_rho, lens_rho,
                  stable_complexity_bounds)
from .transversal import (DimensionError, audit_transversality, subdivide_source, top_dim_subdivision)

FORMAT = "bordiq/1"


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[Path] = field(default_factory=list)
    oriented: bool = False
    cap: int | None = None
    order: str = "repr"
    out: Path | None = None
    seed: int = 0
    refine: int = 0
    threads: int = 1


# ---------------------------------------------------------------------------
# JSON reading and writing


def _load(path: Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise InputError(f"{path}: missing or wrong \"format\" tag (expected {FORMAT!r})")
    return doc


def _need(doc: dict, key: str, kind, path):
    if key not in doc or not isinstance(doc[key], kind):
        raise InputError(f"{path}: field {key!r} missing or of the wrong type")
    return doc[key]


def _vertex(x):
    if isinstance(x, list):
        return tuple(_vertex(y) for y in x)
    return x


def _parse_vertex(s: str):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        return s


def read_complex(path: Path) -> SimplicialComplex:
    doc = _load(path)
    tops = _need(doc, "maximal_simplices", list, path)
    for i, s in enumerate(tops):
        if not isinstance(s, list) or not s:
            raise InputError(f"{path}: maximal_simplices[{i}] is not a nonempty list")
    orientation = None
    if doc.get("orientation"):
        orientation = {tuple(sorted(_vertex(v) for v in s)): int(e) for s, e in doc["orientation"]}
    try:
        X = SimplicialComplex([[_vertex(v) for v in s] for s in tops], orientation)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if "dim" in doc and doc["dim"] != X.dim:
        raise InputError(f"{path}: declared dim {doc['dim']} but the simplices have dim {X.dim}")
    return X


def complex_doc(X: SimplicialComplex) -> dict:
    doc = {"format": FORMAT, "dim": X.dim, "maximal_simplices": [list(s) for s in sorted(X.maximal(), key=repr)]}
    if X.orientation:
        doc["orientation"] = [[list(s), e] for s, e in sorted(X.orientation.items(), key=repr)]
    return doc


def read_cell_complex(path: Path) -> SimplicialCellComplex:
    doc = _load(path)
    cells = []
    for i, c in enumerate(_need(doc, "cells", list, path)):
        try:
            cells.append(Cell(int(c["dim"]), tuple(Facet(int(f["target"]), tuple(f["assign"]))
                                                    for f in c.get("facets", []))))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: cells[{i}] malformed ({exc})") from exc
    P = SimplicialCellComplex(cells)
    issues = P.validate()
    if issues:
        raise InputError(f"{path}: {issues[0]}")
    return P


def cell_complex_doc(P: SimplicialCellComplex) -> dict:
    return {"format": FORMAT, "cells": [{"dim": c.dim, "facets": [{"target": f.target, "assign": list(f.assign)}
                                                                  for f in c.facets]} for c in P.cells]}


def read_cocycle(path: Path) -> Cocycle:
    doc = _load(path)
    group = _need(doc, "group", dict, path)
    try:
        G = FiniteGroup(tuple(tuple(int(x) for x in row) for row in group["table"]), group.get("name", ""))
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: group table malformed") from exc
    except GroupAxiomError as exc:
        raise InputError(f"{path}: {exc}") from exc
    labels = {}
    for key, g in _need(doc, "labels", dict, path).items():
        parts = key.split(",")
        if len(parts) != 2:
            raise InputError(f"{path}: label key {key!r} is not of the form 'u,v'")
        u, v = (_parse_vertex(x) for x in parts)
        if not isinstance(g, int) or not 0 <= g < G.order:
            raise InputError(f"{path}: label {key!r} is not a group index")
        if u > v:
            u, v, g = v, u, G.inv(g)
        labels[(u, v)] = g
    return Cocycle(G, labels)


def cocycle_doc(c: Cocycle) -> dict:
    return {"format": FORMAT, "group": {"table": [list(r) for r in c.group.table], "name": c.group.name},
            "labels": {f"{u},{v}": g for (u, v), g in sorted(c.labels.items(), key=repr)}}


def chain_map_doc(F) -> dict:
    """Sparse triplets ``[dim, source basis element, target basis element, coefficient]``."""
    rows = []
    for k in sorted(F.images):
        for x, img in sorted(F.images[k].items(), key=repr):
            for y, c in sorted(img.items(), key=repr):
                if c:
                    rows.append([k, _jsonable(x), _jsonable(y), c])
    return {"format": FORMAT, "degree": F.degree, "dims": list(F.dims), "triplets": rows}


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    if isinstance(x, frozenset):
        return sorted((_jsonable(y) for y in x), key=repr)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_jsonable(y) for y in x]
    return x


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1) + "\n"


def write_archive(out: Path, files: dict[str, dict], summary: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    digests = {}
    for name, doc in sorted(files.items()):
        text = _dump(doc)
        (out / name).write_text(text)
        digests[name] = hashlib.sha256(text.encode()).hexdigest()
    manifest = {"format": FORMAT, "kind": "bordism", "version": __version__, "files": digests, "summary": summary}
    (out / "manifest.json").write_text(_dump(manifest))


def read_archive(path: Path) -> dict:
    manifest = _load(path / "manifest.json")
    files = _need(manifest, "files", dict, path / "manifest.json")
    _need(manifest, "summary", dict, path / "manifest.json")
    for name, digest in files.items():
        f = path / name
        if not f.is_file():
            raise InputError(f"{path}: archive member {name} is missing")
        if hashlib.sha256(f.read_bytes()).hexdigest() != digest:
            raise InputError(f"{path}: archive member {name} does not match its checksum")
        _load(f)
    return manifest


# ---------------------------------------------------------------------------
# refinement


def barycentric(X: SimplicialComplex) -> tuple[SimplicialComplex, dict]:
    """First barycentric subdivision; vertices are the sorted simplices of ``X``.
    Also returns the last-vertex map, a simplicial approximation of the identity."""
    tops = []
    for t in X.maximal():
        def chains(s):
            if len(s) == 1:
                yield [s]
                return
            for i in range(len(s)):
                for c in chains(s[:i] + s[i + 1:]):
                    yield c + [s]
        tops.extend(chains(t))
    Y = SimplicialComplex(tops)
    return Y, {v: v[-1] for v in Y.vertices}


def refined(M: SimplicialComplex, c: Cocycle | None, k: int) -> tuple[SimplicialComplex, Cocycle | None]:
    """Refine ``k`` times, pulling the cocycle back along the last-vertex maps."""
    for _ in range(k):
        Y, last = barycentric(M)
        order = sorted(Y.vertices, key=lambda s: (len(s), s))
        remap = {v: i for i, v in enumerate(order)}
        if c is not None:
            labels = {}
            for u, v in Y.simplices(1):
                a, b = sorted((remap[u], remap[v]))
                labels[(a, b)] = c.label(last[order[a]], last[order[b]])
            c = Cocycle(c.group, labels)
        M = Y.relabel(remap)
    return M, c


# ---------------------------------------------------------------------------
# commands


def _map(cfg: RunConfig, M: SimplicialComplex, c: Cocycle):
    try:
        return from_cocycle(M, c, cfg.cap)
    except InvalidCocycleError as exc:
        raise InputError(str(exc)) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _inputs(cfg: RunConfig, count: int):
    if len(cfg.inputs) != count:
        raise InputError(f"{cfg.command} expects {count} input file(s)")
    M = read_complex(cfg.inputs[0])
    if cfg.cap is not None and cfg.cap < 0:
        raise InputError("skeleton cap must be nonnegative")
    if count == 1:
        return M, None
    return M, read_cocycle(cfg.inputs[1])


def cmd_audit(cfg: RunConfig, M, c=None) -> tuple[int, dict]:
    rep = verify_closed_manifold(M, M.dim)
    cx = complexity(M)
    row = {"dim": M.dim, "simplices": len(M), "certified": rep.certified, "closed_pseudomanifold": rep.pseudomanifold,
           "f_vector": cx.histogram, "geometry_type": cx.geometry_type, "euler": M.euler_characteristic()}
    return (0 if rep.ok else 1), row


def cmd_transversal(cfg: RunConfig, M, c) -> tuple[int, dict]:
    f, _ = _map(cfg, M, c)
    a = audit_transversality(f, cfg.oriented)
    row = {"n": a.n, "p": a.p, "source": a.source_size, "fibers": a.fiber_size, "cobordisms": a.cobordism_size,
           "fiber_ratio": a.fiber_ratio, "cobordism_ratio": a.cobordism_ratio, "nonempty_law": a.nonempty_law,
           "parity_law": a.parity_law, "bound_law": a.bound_law, "signed_law": a.signed_law,
           "fibers_certified": a.fibers_certified, "disjoint": a.disjoint, "ok": a.ok}
    return (0 if a.ok else 1), row


def cmd_subdivide(cfg: RunConfig, M, c) -> tuple[int, dict]:
    f, _ = _map(cfg, M, c)
    sub = top_dim_subdivision(f.target)
    K, f2, rep = subdivide_source(f, sub)
    valid = validate(f2).ok
    row = {"source": len(M), "subdivided": len(K), "pieces": rep.pieces, "max_per_simplex": rep.max_per_simplex,
           "bound": rep.bound, "map_valid": valid, "ok": rep.ok and valid}
    if cfg.out is not None:
        X = K.relabel({v: i for i, v in enumerate(sorted(K.vertices, key=repr))})
        write_archive(cfg.out, {"subdivided.json": complex_doc(X), "target.json": cell_complex_doc(sub.Pp)}, row)
    return (0 if row["ok"] else 1), row


def cmd_bordify(cfg: RunConfig, M, c) -> tuple[int, dict]:
    f, _ = _map(cfg, M, c)
    if f.target.dim > M.dim:
        raise InputError("image dimension exceeds the source dimension")
    K, P, include = cone_supplier(f.target)
    try:
        pkg = assemble_step(M, f, K, P, include, cfg.oriented)
    except VerificationError as exc:
        return 1, {"ok": False, "error": str(exc)}
    a = audit_bordism(pkg)
    row = {"n": pkg.n, "p": pkg.p, "source": pkg.source_size, "W": pkg.size, "M_prime": len(pkg.M_prime),
           "N": len(pkg.N), "ratio": pkg.ratio, "boundary_ok": a.boundary_ok, "monotone": a.monotone,
           "N_certified": a.N_certified, "orientable": a.orientable, "ok": a.ok}
    if cfg.out is not None:
        files = {"W.json": complex_doc(pkg.W), "M_prime.json": complex_doc(pkg.M_prime),
                 "N.json": complex_doc(pkg.N), "homotopy.json": chain_map_doc(P),
                 "carriers.json": {"format": FORMAT, "K": cell_complex_doc(K)["cells"],
                                   "carriers": [[list(t), k, [sorted(s) for s in sl]]
                                                for t, (k, sl) in sorted(pkg.carriers.items())]},
                 "audit.json": {"format": FORMAT, **a.as_dict()}}
        write_archive(cfg.out, files, row)
    return (0 if a.ok else 1), row


def cmd_descend(cfg: RunConfig, M, c) -> tuple[int, dict]:
    f, _ = _map(cfg, M, c)
    try:
        res = skeleton_descent(M, f, oriented=cfg.oriented)
    except VerificationError as exc:
        return 1, {"ok": False, "error": str(exc)}
    au = res.audit()
    ok = au["boundary_exact"] and au["N_constant_per_component"] and au["N_certified"]
    row = {"n": M.dim, "source": res.source_size, "W": len(res.W), "M_prime": len(res.M_prime), "N": len(res.N),
           "ratio": res.ratio, "stages": len(res.stages), "boundary_exact": au["boundary_exact"],
           "N_constant": au["N_constant_per_component"], "N_certified": au["N_certified"], "ok": ok}
    if cfg.out is not None:
        files = {"W.json": complex_doc(res.W), "M_prime.json": complex_doc(res.M_prime),
                 "N.json": complex_doc(res.N), "audit.json": {"format": FORMAT, **au}}
        write_archive(cfg.out, files, row)
    return (0 if ok else 1), row


COMMANDS = {"audit": (cmd_audit, 1), "transversal": (cmd_transversal, 2), "subdivide": (cmd_subdivide, 2),
            "bordify": (cmd_bordify, 2), "descend": (cmd_descend, 2)}


def _level(args) -> tuple[int, dict]:
    cfg, M, c, k = args
    fn, count = COMMANDS[cfg.command]
    if k:
        M, c = refined(M, c, k)
    status, row = fn(cfg, M, c)
    return status, {"level": k, **row}


def run(cfg: RunConfig) -> tuple[int, list[dict]]:
    fn, count = COMMANDS[cfg.command]
    M, c = _inputs(cfg, count)
    jobs = [(cfg, M, c, k) for k in range(cfg.refine + 1)] if cfg.refine else [(cfg, M, c, 0)]
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_level, jobs))
    else:
        results = [_level(j) for j in jobs]
    status = max(s for s, _ in results)
    return status, [r for _, r in results]


def sweep_table(rows: list[dict]) -> str:
    """Ratio columns per refinement level with the running max and the last/first trend."""
    cols = [k for k in rows[0] if k.endswith("ratio")]
    out = ["level  source  " + "  ".join(f"{c:>16}" for c in cols)]
    for r in rows:
        out.append(f"{r['level']:>5}  {r.get('source', 0):>6}  " + "  ".join(f"{r.get(c, 0):>16.4f}" for c in cols))
    for name, fn in (("max", max), ("trend", lambda xs: xs[-1] / xs[0] if xs[0] else 0.0)):
        vals = [fn([r.get(c, 0.0) for r in rows]) for c in cols]
        out.append(f"{name:>5}  {'':>6}  " + "  ".join(f"{v:>16.4f}" for v in vals))
    return "\n".join(out)


def report(path: Path) -> str:
    path = Path(path)
    if path.is_dir():
        m = read_archive(path)
        s = m["summary"]
        lines = [f"archive {path} ({m.get('kind', '?')}, {len(m['files'])} files)"]
        for k in sorted(s):
            lines.append(f"  {k:<18} {s[k]}")
        verdict = s.get("ok")
        lines.append(f"  verdict            {'PASS' if verdict else 'FAIL'}")
        return "\n".join(lines)
    doc = _load(path)
    if doc.get("kind") == "sweep":
        rows = _need(doc, "rows", list, path)
        if not rows:
            raise InputError(f"{path}: empty sweep")
        return sweep_table(rows)
    if "maximal_simplices" in doc:
        X = read_complex(path)
        return f"complex dim {X.dim}, {len(X)} simplices, f-vector {X.f_vector()}, euler {X.euler_characteristic()}"
    raise InputError(f"{path}: unrecognised document")


def cmd_rho(args) -> str:
    if args.what == "lens":
        N, k = int(args.values[0]), int(args.values[1])
        return f"{lens_rho(N, k):.10f}"
    if args.what == "bound":
        return str(bordism_rho_bound(int(args.values[0])))
    if args.what == "sum":
        return str(connected_sum_rho(int(args.values[0]), Fraction(args.values[1])))
    if args.what == "stable":
        lo, hi = stable_complexity_bounds(Fraction(args.values[0]), int(args.values[1]), Fraction(args.values[2]))
        return f"{lo} {hi}"
    cl, lower = commutator_genus_bound(int(args.values[0]))
    return f"{cl} {lower}"


RHO_ARITY = {"lens": 2, "bound": 1, "sum": 2, "stable": 3, "cl": 1}


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bordiq", description="Bordisms to trivial ends for maps into BG skeleta.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, count) in COMMANDS.items():
        sp = sub.add_parser(name, help=f"run {name} on a complex" + (" and a cocycle" if count == 2 else ""))
        sp.add_argument("inputs", nargs=count, type=Path, metavar="FILE")
        sp.add_argument("--oriented", action="store_true", help="track orientation signs")
        sp.add_argument("--refine", type=int, default=0, metavar="K",
                        help="sweep barycentric refinements 0..K and print a ratio table")
        sp.add_argument("--cap", type=int, default=None, help="bar skeleton cap (default: image dimension)")
        sp.add_argument("--order", choices=["repr"], default="repr", help="pulling order policy")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("-o", "--out", type=Path, default=None, help="output archive directory or sweep file")
        sp.add_argument("--json", action="store_true", help="print JSON instead of a table")
    rp = sub.add_parser("rho", help="rho-invariant arithmetic")
    rp.add_argument("what", choices=sorted(RHO_ARITY))
    rp.add_argument("values", nargs="+")
    pp = sub.add_parser("report", help="summarise an archive, sweep or complex file")
    pp.add_argument("artifact", type=Path)
    return ap


def _threads() -> int:
    raw = os.environ.get("BORDIQ_THREADS", "1")
    try:
        t = int(raw)
    except ValueError:
        raise InputError(f"BORDIQ_THREADS={raw!r} is not an integer") from None
    if t < 1:
        raise InputError("BORDIQ_THREADS must be at least 1")
    return t


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    try:
        if args.command == "rho":
            if len(args.values) != RHO_ARITY[args.what]:
                raise InputError(f"rho {args.what} takes {RHO_ARITY[args.what]} value(s)")
            try:
                print(cmd_rho(args))
            except (ValueError, ZeroDivisionError) as exc:
                raise InputError(str(exc)) from exc
            return 0
        if args.command == "report":
            print(report(args.artifact))
            return 0
        if args.refine < 0:
            raise InputError("--refine must be nonnegative")
        cfg = RunConfig(args.command, list(args.inputs), args.oriented, args.cap, args.order,
                        args.out, args.seed, args.refine, _threads())
        if cfg.refine and cfg.out is not None:
            cfg.out.parent.mkdir(parents=True, exist_ok=True)
        status, rows = run(RunConfig(**{**cfg.__dict__, "out": None if cfg.refine else cfg.out}))
        if cfg.refine:
            if cfg.out is not None:
                cfg.out.write_text(_dump({"format": FORMAT, "kind": "sweep", "command": cfg.command, "rows": rows}))
            print(json.dumps(_jsonable(rows), sort_keys=True) if args.json else sweep_table(rows))
        else:
            row = rows[0]
            if args.json:
                print(json.dumps(_jsonable(row), sort_keys=True))
            else:
                for k, v in row.items():
                    print(f"{k:<18} {v}")
        return status
    except InputError as exc:
        print(f"bordiq: error: {exc}", file=sys.stderr)
        return 2
    except (DimensionError, DomainError, StructureError) as exc:
        print(f"bordiq: error: {exc}", file=sys.stderr)
        return 2
    except VerificationError as exc:
        print(f"bordiq: verification failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
