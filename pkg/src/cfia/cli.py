"""Command-line entry point.

Exit codes: 0 success, 1 validation failure (bad input, failed check),
2 internal error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import io as cio
from .compositing import compose, export_composite, read_image, read_label_map, split_label_map
from .config import RunConfig
from .pipeline import PipelineInputs, StageError, run_pipeline, validate_fixture_suite
from .regions import DEDUP_RULES, dedup, enumerate_all, load_fixture_catalog, parse_region_code

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2

log = logging.getLogger("cfia")


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "alpha", None) is not None:
        overrides["alpha"] = args.alpha
    if getattr(args, "tau_deg", None) is not None:
        overrides["tau"] = math.radians(args.tau_deg)
    if getattr(args, "far", None) is not None:
        overrides["far"] = args.far
    if getattr(args, "dedup_rule", None) is not None:
        overrides["dedup_rule"] = args.dedup_rule
    if getattr(args, "no_ftar", False):
        overrides["include_ftar"] = False
    if getattr(args, "alpha_first_step", False):
        overrides["alpha_first_step"] = True
    return replace(cfg, **overrides)


def _emit(bundle, out) -> None:
    if out:
        bundle.write(out)
        sys.stdout.write(bundle.summary())
    else:
        sys.stdout.write(bundle.to_json())


def _failed_checks(bundle) -> int:
    failed = [c for c in bundle.checks if not c["passed"]]
    for c in failed:
        log.error("check %s failed: %s", c["name"], c["detail"])
    return EXIT_INVALID if failed else EXIT_OK


def cmd_enumerate(args) -> int:
    cfg = _config(args)
    bundle = run_pipeline(cfg, PipelineInputs())
    if args.list:
        source = load_fixture_catalog() if args.list == "fixture" else dedup(enumerate_all(), cfg.dedup_rule)
        for c in source.combinations:
            print(f"{c.region_index}\t{c.code}")
        return EXIT_OK
    _emit(bundle, args.out)
    return _failed_checks(bundle)


def cmd_composite(args) -> int:
    cfg = _config(args)
    if args.out is None:
        raise ValueError("--out is required for composite")
    img1, img2 = read_image(args.donor1), read_image(args.donor2)
    parts1 = split_label_map(read_label_map(args.labels1), img1)
    parts2 = split_label_map(read_label_map(args.labels2), img2)
    if args.all:
        combos = dedup(enumerate_all(), cfg.dedup_rule).combinations
    elif args.code:
        combos = [parse_region_code(c) for c in args.code]
    else:
        raise ValueError("give --code at least once or --all")
    id1, id2 = Path(args.donor1).stem, Path(args.donor2).stem

    def job(combo):
        out = compose(parts1, parts2, combo, cfg.alpha, cfg.alpha_first_step)
        out.donor1_id, out.donor2_id = id1, id2
        export_composite(out, args.out)
        return combo.code

    # donors are shared read-only; each job writes its own files
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        done = list(pool.map(job, combos))
    print(f"wrote {len(done)} composites to {args.out}")
    return EXIT_OK


def cmd_pose_filter(args) -> int:
    cfg = _config(args)
    bundle = run_pipeline(cfg, PipelineInputs(landmarks=args.landmarks))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        cio.write_csv(Path(args.out) / "pose.csv", ["image_id", "theta1", "theta2", "angle_diff", "frontal"],
                      [[f["image_id"], repr(f["theta1"]), repr(f["theta2"]), repr(f["angle_diff"]),
                        int(f["frontal"])] for f in bundle.pose["faces"]])
    _emit(bundle, args.out)
    return _failed_checks(bundle)


def cmd_pair(args) -> int:
    bundle = run_pipeline(_config(args), PipelineInputs(embeddings=args.embeddings))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        cio.write_csv(Path(args.out) / "pairs.csv", ["subject_a", "subject_b", "distance"],
                      [[p["subject_a"], p["subject_b"], repr(p["distance"])] for p in bundle.pairs["pairs"]])
    _emit(bundle, args.out)
    return _failed_checks(bundle)


def cmd_vuln(args) -> int:
    bundle = run_pipeline(_config(args), PipelineInputs(scores=args.scores, impostors=args.impostors))
    _emit(bundle, args.out)
    return _failed_checks(bundle)


def cmd_detect(args) -> int:
    bundle = run_pipeline(_config(args), PipelineInputs(detection=args.scores))
    _emit(bundle, args.out)
    return _failed_checks(bundle)


def cmd_quality(args) -> int:
    bundle = run_pipeline(_config(args), PipelineInputs(quality_pairs=args.pairs))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        cio.write_csv(Path(args.out) / "quality.csv", ["pair_id", "region", "psnr", "ssim"],
                      [[p["pair_id"], p["region"], repr(p["psnr"]) if isinstance(p["psnr"], float) else p["psnr"],
                        repr(p["ssim"])] for p in bundle.quality["pairs"]])
    _emit(bundle, args.out)
    return _failed_checks(bundle)


def cmd_run(args) -> int:
    inputs = PipelineInputs(scores=args.scores, impostors=args.impostors, detection=args.detector_scores,
                            quality_pairs=args.pairs, landmarks=args.landmarks, embeddings=args.embeddings)
    bundle = run_pipeline(_config(args), inputs)
    _emit(bundle, args.out)
    return _failed_checks(bundle)


def cmd_validate(args) -> int:
    results = validate_fixture_suite()
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status}  {r['name']}" + (f"  ({r['detail']})" if r["detail"] else ""))
    failed = sum(not r["passed"] for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_INVALID if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its fields")
    common.add_argument("--out", help="output directory (default: JSON bundle on stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cfia", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("enumerate", parents=[common], help="region combination catalog summary")
    s.add_argument("--dedup-rule", choices=sorted(DEDUP_RULES))
    s.add_argument("--list", choices=["catalog", "fixture"], help="print combinations instead of the summary")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("composite", parents=[common], help="initial composite images and masks")
    s.add_argument("--donor1", required=True)
    s.add_argument("--labels1", required=True)
    s.add_argument("--donor2", required=True)
    s.add_argument("--labels2", required=True)
    s.add_argument("--code", action="append", help="region code such as SEN-M; repeatable")
    s.add_argument("--all", action="store_true", help="every combination kept by the dedup rule")
    s.add_argument("--dedup-rule", choices=sorted(DEDUP_RULES))
    s.add_argument("--alpha", type=float)
    s.add_argument("--alpha-first-step", action="store_true", help="also scale donor one's paint step by alpha")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_composite)

    s = sub.add_parser("pose-filter", parents=[common], help="frontal-pose screening from landmarks")
    s.add_argument("--landmarks", required=True)
    s.add_argument("--tau-deg", type=float)
    s.set_defaults(func=cmd_pose_filter)

    s = sub.add_parser("pair", parents=[common], help="look-alike donor pairing from embeddings")
    s.add_argument("--embeddings", required=True)
    s.set_defaults(func=cmd_pair)

    s = sub.add_parser("vuln", parents=[common], help="G-MAP, MMPMR, FMMPMR and MAP")
    s.add_argument("--scores", required=True)
    s.add_argument("--impostors", required=True)
    s.add_argument("--far", type=float)
    s.add_argument("--no-ftar", action="store_true")
    s.set_defaults(func=cmd_vuln)

    s = sub.add_parser("detect", parents=[common], help="D-EER and BPCER at fixed APCER")
    s.add_argument("--scores", required=True)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("quality", parents=[common], help="PSNR and SSIM of composite/reference pairs")
    s.add_argument("--pairs", required=True)
    s.set_defaults(func=cmd_quality)

    s = sub.add_parser("run", parents=[common], help="every stage whose inputs are given")
    for flag in ("--scores", "--impostors", "--detector-scores", "--pairs", "--landmarks", "--embeddings"):
        s.add_argument(flag)
    s.add_argument("--alpha", type=float)
    s.add_argument("--tau-deg", type=float)
    s.add_argument("--far", type=float)
    s.add_argument("--dedup-rule", choices=sorted(DEDUP_RULES))
    s.add_argument("--no-ftar", action="store_true")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("validate", parents=[common], help="self-check of fixtures and metric oracles")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if isinstance(exc.cause, ValueError) else EXIT_INTERNAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - last-resort guard for exit code 2
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
