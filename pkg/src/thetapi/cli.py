"""Command-line frontend: reproducible batch runs over point-cloud files.

Artifacts are deterministic JSON -- sorted keys, no timestamps -- embedding
the SHA-256 of every input file and the full parameter echo, so identical
inputs and flags produce byte-identical outputs.  Exit codes: 0 success,
2 invalid input or rejected certificate, 3 homotopy budget exhausted,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .decider import are_homotopic, is_nullhomotopic
from .errors import InternalCheckError, ThetapiError, ValidationError
from .oracle import compare_at_scale
from .paths import (ThetaPath, discretize, homotopy_from_json,
                    homotopy_to_json, path_from_json, path_to_json,
                    validate_path, verify_grid_homotopy)
from .presentation import tietze_simplify
from .scale_maps import (analyze_scale, barcode, barcode_to_csv,
                         inverse_limit_report, sweep)
from .spaces import GENERATORS, load_polyline, load_space, save_space
from .theta_graph import (build_graph, components, critical_scales,
                          write_dot, write_edges_csv)

log = logging.getLogger("thetapi")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    except FileNotFoundError as e:
        raise ValidationError(f"no such file: {path}") from e
    return h.hexdigest()


def _dump(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _emit(data: dict, output: str | None, outputs: list[Path]) -> None:
    text = _dump(data)
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        p = Path(output)
        outputs.append(p)
        p.write_text(text)


def _artifact(command: str, hashes: dict[str, str], params: dict) -> dict:
    return {
        "command": command,
        "input_sha256": dict(hashes),
        "params": {k: v for k, v in sorted(params.items())},
        "version": __version__,
    }


def _threads(args) -> int:
    # Accepted for interface stability; all current pipelines drain their
    # work in a deterministic serial order.
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("THETAPI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as e:
            raise ValidationError(f"bad THETAPI_THREADS value {env!r}") from e
    return os.cpu_count() or 1


def _parse_scales(text: str):
    if text == "critical":
        return "critical"
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ValidationError(
            f"--scales wants 'critical' or a comma-separated list, "
            f"got {text!r}") from e


def _load_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError as e:
        raise ValidationError(f"no such file: {path}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"unreadable JSON in {path}: {e}") from e


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen(args, outputs: list[Path]) -> int:
    if not args.output:
        raise ValidationError("gen writes a CSV file; pass -o/--output")
    family = args.family
    try:
        params = json.loads(args.params) if args.params else {}
    except json.JSONDecodeError as e:
        raise ValidationError(f"--params is not valid JSON: {e}") from e
    if not isinstance(params, dict):
        raise ValidationError("--params must be a JSON object")
    try:
        space = GENERATORS[family](**params)
    except TypeError as e:
        raise ValidationError(
            f"bad parameters for generator {family!r}: {e}") from e
    out = Path(args.output)
    outputs.append(out)
    save_space(space, out)
    summary = _artifact("gen", {}, {"family": family, "params": params})
    summary.update({
        "points": space.n,
        "basepoint": space.basepoint,
        "output": str(out),
        "output_sha256": _sha256(out),
    })
    sys.stdout.write(_dump(summary))
    return 0


def cmd_graph(args, outputs: list[Path]) -> int:
    cloud = Path(args.cloud)
    space = load_space(cloud)
    graph = build_graph(space, args.theta)
    if args.output:
        out = Path(args.output)
        outputs.append(out)
        with open(out, "w") as fh:
            if args.format == "dot":
                write_dot(graph, fh)
            else:
                write_edges_csv(graph, fh)
        summary = _artifact("graph", {"cloud": _sha256(cloud)},
                            {"theta": args.theta, "format": args.format})
        summary.update({
            "vertices": graph.n,
            "edges": graph.num_edges,
            "components": len(components(graph)),
            "output": str(out),
        })
        sys.stdout.write(_dump(summary))
    else:
        if args.format == "dot":
            write_dot(graph, sys.stdout)
        else:
            write_edges_csv(graph, sys.stdout)
    return 0


def cmd_pi1(args, outputs: list[Path]) -> int:
    cloud = Path(args.cloud)
    space = load_space(cloud)
    analysis = analyze_scale(space, args.theta, args.basepoint,
                             fold=not args.no_fold,
                             relator_policy=args.policy)
    pres = analysis.presentation
    result = _artifact("pi1", {"cloud": _sha256(cloud)}, {
        "theta": args.theta,
        "basepoint": analysis.basepoint,
        "policy": args.policy,
        "fold": not args.no_fold,
        "simplify": args.simplify,
    })
    result.update({
        "invariants": {
            "rank": analysis.invariants.rank,
            "torsion": list(analysis.invariants.torsion),
            "pretty": str(analysis.invariants),
        },
        "num_generators": pres.num_generators,
        "num_relators": pres.num_relators,
        "generators": [list(g) for g in pres.generators],
        "relators": [list(w) for w in pres.relators],
        "graph": {"edges": analysis.graph.num_edges,
                  "folded_away": (analysis.fold.num_removed
                                  if analysis.fold is not None else 0)},
    })
    if args.simplify:
        simp = tietze_simplify(pres, args.simplify)
        result["simplified"] = {
            "effort": args.simplify,
            "num_generators": simp.num_generators,
            "num_relators": simp.num_relators,
            "relators": [list(w) for w in simp.relators],
        }
    _emit(result, args.output, outputs)
    return 0


def cmd_sweep(args, outputs: list[Path]) -> int:
    cloud = Path(args.cloud)
    space = load_space(cloud)
    tower = sweep(space, _parse_scales(args.scales), args.basepoint,
                  relator_policy=args.policy)
    bars = barcode(tower)
    result = _artifact("sweep", {"cloud": _sha256(cloud)}, {
        "scales": args.scales,
        "basepoint": tower.basepoint,
        "policy": args.policy,
    })
    result.update({
        "scales_descending": list(tower.scales),
        "per_scale": [{
            "theta": a.theta,
            "rank": a.invariants.rank,
            "torsion": list(a.invariants.torsion),
            "pretty": str(a.invariants),
            "generators": a.presentation.num_generators,
            "relators": a.presentation.num_relators,
        } for a in tower.analyses],
        "barcode": [{
            "birth": b.birth,
            "death": b.death,
            "multiplicity": b.multiplicity,
        } for b in bars],
        "inverse_limit": inverse_limit_report(tower),
    })
    if args.barcode_csv:
        out = Path(args.barcode_csv)
        outputs.append(out)
        with open(out, "w") as fh:
            barcode_to_csv(bars, fh)
    _emit(result, args.output, outputs)
    return 0


def cmd_homotopy(args, outputs: list[Path]) -> int:
    cloud = Path(args.cloud)
    space = load_space(cloud)
    hashes = {"cloud": _sha256(cloud), "path1": _sha256(Path(args.path1))}
    raw1 = _load_json(Path(args.path1))
    p = path_from_json(raw1, space)
    q = None
    if args.path2:
        hashes["path2"] = _sha256(Path(args.path2))
        p2 = _load_json(Path(args.path2))
        q = path_from_json(p2, space)
    if args.theta is not None:
        p = ThetaPath(space, float(args.theta), p.points)
        validate_path(p)
        if q is not None:
            q = ThetaPath(space, float(args.theta), q.points)
            validate_path(q)
    if q is None:
        result = is_nullhomotopic(p, max_states=args.budget,
                                  max_width=args.max_width)
    else:
        result = are_homotopic(p, q, max_states=args.budget,
                               max_width=args.max_width)
    artifact = _artifact("homotopy", hashes, {
        "theta": p.theta,
        "budget": args.budget,
        "max_width": args.max_width,
        "paths": 1 if q is None else 2,
    })
    artifact.update({"verdict": result.verdict, "stats": result.stats})
    if result.obstruction is not None:
        artifact["obstruction"] = result.obstruction
    if result.certificate is not None:
        cert_json = homotopy_to_json(result.certificate)
        if args.certificate:
            cert_out = Path(args.certificate)
            outputs.append(cert_out)
            cert_out.write_text(_dump(cert_json))
            artifact["certificate_file"] = str(cert_out)
        else:
            artifact["certificate"] = cert_json
    _emit(artifact, args.output, outputs)
    return 3 if result.verdict == "unknown" else 0


def cmd_discretize(args, outputs: list[Path]) -> int:
    poly_file = Path(args.polyline)
    poly = load_polyline(poly_file)
    hashes = {"polyline": _sha256(poly_file)}
    snap_space = None
    if args.snap:
        hashes["snap"] = _sha256(Path(args.snap))
        snap_space = load_space(Path(args.snap))
    elif not args.space_out:
        raise ValidationError(
            "without --snap the sampled space must go somewhere; "
            "pass --space-out")
    path = discretize(poly, args.theta, snap_space, snap_tol=args.snap_tol,
                      subdivide=args.subdivide)
    if args.space_out:
        space_out = Path(args.space_out)
        outputs.append(space_out)
        save_space(path.space, space_out)
    artifact = _artifact("discretize", hashes, {
        "theta": args.theta,
        "snap": bool(args.snap),
        "snap_tol": args.snap_tol,
        "subdivide": args.subdivide,
    })
    artifact.update({
        "path": path_to_json(path),
        "declared_theta": path.theta,
        "points": len(path.points),
        "space_points": path.space.n,
    })
    if args.space_out:
        artifact["space_file"] = str(args.space_out)
    _emit(artifact, args.output, outputs)
    return 0


def cmd_verify(args, outputs: list[Path]) -> int:
    cloud = Path(args.space)
    space = load_space(cloud)
    cert_file = Path(args.certificate)
    hashes = {"space": _sha256(cloud), "certificate": _sha256(cert_file)}
    cert = homotopy_from_json(_load_json(cert_file), space)
    from_path = to_path = None
    if args.from_path:
        hashes["from"] = _sha256(Path(args.from_path))
        from_path = path_from_json(_load_json(Path(args.from_path)), space)
    if args.to_path:
        hashes["to"] = _sha256(Path(args.to_path))
        to_path = path_from_json(_load_json(Path(args.to_path)), space)
    report = verify_grid_homotopy(cert, from_path, to_path)
    artifact = _artifact("verify", hashes, {
        "endpoints_fixed": cert.endpoints_fixed,
        "theta": cert.theta,
    })
    artifact.update({
        "ok": report.ok,
        "rows": report.rows,
        "width": report.width,
        "failures": report.failures,
    })
    _emit(artifact, args.output, outputs)
    return 0 if report.ok else 2


def cmd_oracle(args, outputs: list[Path]) -> int:
    cloud = Path(args.cloud)
    space = load_space(cloud)
    scales = ([float(args.theta)] if args.theta is not None
              else critical_scales(space))
    results = [compare_at_scale(space, t, args.basepoint) for t in scales]
    all_agree = all(r["agree"] for r in results)
    artifact = _artifact("oracle", {"cloud": _sha256(cloud)}, {
        "theta": args.theta,
        "basepoint": args.basepoint,
    })
    artifact.update({"results": results, "all_agree": all_agree})
    _emit(artifact, args.output, outputs)
    if not all_agree:
        log.error("presentation pipeline disagrees with the brute-force "
                  "oracle -- this is a bug")
        return 4
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=None,
                        help="output file (default: stdout)")
    common.add_argument("--verbose", action="store_true",
                        help="diagnostics on stderr")
    common.add_argument("--threads", type=int, default=None,
                        help="parallelism hint (results are "
                             "schedule-independent); default "
                             "THETAPI_THREADS or machine parallelism")

    ap = argparse.ArgumentParser(
        prog="thetapi",
        description="Discrete fundamental groups of finite metric spaces.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common],
                       help="generate an example space as CSV + sidecar")
    g.add_argument("family", choices=sorted(GENERATORS))
    g.add_argument("--params", default=None,
                   help="JSON object of generator parameters")
    g.set_defaults(func=cmd_gen)

    gr = sub.add_parser("graph", parents=[common],
                        help="export the neighborhood graph at a scale")
    gr.add_argument("cloud")
    gr.add_argument("--theta", type=float, required=True)
    gr.add_argument("--format", choices=("dot", "csv"), default="dot")
    gr.set_defaults(func=cmd_graph)

    p1 = sub.add_parser("pi1", parents=[common],
                        help="presentation and abelian invariants at a scale")
    p1.add_argument("cloud")
    p1.add_argument("--theta", type=float, required=True)
    p1.add_argument("--basepoint", type=int, default=None)
    p1.add_argument("--policy", choices=("all", "reduced"), default="reduced")
    p1.add_argument("--no-fold", action="store_true",
                    help="present the full graph instead of the folded core")
    p1.add_argument("--simplify", choices=("light", "standard", "heavy"),
                    default=None)
    p1.set_defaults(func=cmd_pi1)

    sw = sub.add_parser("sweep", parents=[common],
                        help="tower, barcode and inverse-limit report")
    sw.add_argument("cloud")
    sw.add_argument("--scales", default="critical",
                    help="'critical' or a comma-separated list")
    sw.add_argument("--basepoint", type=int, default=None)
    sw.add_argument("--policy", choices=("all", "reduced"), default="reduced")
    sw.add_argument("--barcode-csv", default=None,
                    help="also write the barcode as CSV")
    sw.set_defaults(func=cmd_sweep)

    ho = sub.add_parser("homotopy", parents=[common],
                        help="decide null-homotopy of one path or homotopy "
                             "of two")
    ho.add_argument("cloud")
    ho.add_argument("path1")
    ho.add_argument("path2", nargs="?", default=None)
    ho.add_argument("--theta", type=float, default=None,
                    help="override the scale recorded in the path files")
    ho.add_argument("--budget", type=int, default=1_000_000,
                    help="maximum number of search states")
    ho.add_argument("--max-width", type=int, default=None)
    ho.add_argument("--certificate", default=None,
                    help="write the certificate to this file instead of "
                         "embedding it")
    ho.set_defaults(func=cmd_homotopy)

    di = sub.add_parser("discretize", parents=[common],
                        help="sample a polyline into a path at a scale")
    di.add_argument("polyline")
    di.add_argument("--theta", type=float, required=True)
    di.add_argument("--snap", default=None,
                    help="snap samples onto this existing cloud")
    di.add_argument("--snap-tol", type=float, default=None)
    di.add_argument("--subdivide", type=float, default=1.0)
    di.add_argument("--space-out", default=None,
                    help="write the sampled space (required without --snap)")
    di.set_defaults(func=cmd_discretize)

    ve = sub.add_parser("verify", parents=[common],
                        help="check a homotopy certificate independently")
    ve.add_argument("certificate")
    ve.add_argument("--space", required=True)
    ve.add_argument("--from-path", default=None)
    ve.add_argument("--to-path", default=None)
    ve.set_defaults(func=cmd_verify)

    orc = sub.add_parser("oracle", parents=[common],
                         help="brute-force cross-check on a small space")
    orc.add_argument("cloud")
    orc.add_argument("--theta", type=float, default=None,
                     help="one scale (default: every critical scale)")
    orc.add_argument("--basepoint", type=int, default=None)
    orc.set_defaults(func=cmd_oracle)
    return ap


def _remove_partials(outputs: list[Path]) -> None:
    for p in outputs:
        try:
            p.unlink(missing_ok=True)
        except OSError:  # pragma: no cover
            log.warning("could not remove partial output %s", p)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    log.debug("threads resolved to %d", _threads(args))
    outputs: list[Path] = []
    try:
        return args.func(args, outputs)
    except ValidationError as e:
        _remove_partials(outputs)
        sys.stderr.write(_dump({"error": {"type": "validation",
                                          "message": str(e)}}))
        return 2
    except InternalCheckError as e:
        _remove_partials(outputs)
        sys.stderr.write(_dump({"error": {"type": "internal-invariant",
                                          "message": str(e)}}))
        return 4
    except ThetapiError as e:
        _remove_partials(outputs)
        sys.stderr.write(_dump({"error": {"type": "error",
                                          "message": str(e)}}))
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
