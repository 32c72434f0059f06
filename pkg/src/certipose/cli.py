"""Command-line interface.

Subcommands cover the full pipeline: exporting targets, rendering concrete
images, partitioning pose space, precomputing candidate stores, running the
estimator on one image, batch experiments (CSV plus report figures), and
basic denoising.  Exit codes: 0 success, 2 configuration error, 3 store
mismatch, 4 soundness violation (a ground-truth pose escaped its estimate).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import CertiPoseError, StoreCorrupt, StoreMismatch
from .estimator import EstimateConfig, estimate
from .experiment import ScenarioConfig, rows_to_csv, run_experiment
from .forward import HullConfig
from .geometry import CameraParams, Pose, Target, denoise, render
from .image import BinaryImage
from .partition import PartitionConfig, PoseSpace, partition, precompute_store
from .sets import Interval
from .store import CandidateStore
from .targets import builtin_target, builtin_target_names

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STORE_MISMATCH = 3
EXIT_SOUNDNESS = 4

STORE_ENV_VAR = "CERTIPOSE_STORE"


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_bytes()
    if p.suffix.lower() == ".json":
        return json.loads(text)
    if p.suffix.lower() == ".toml":
        try:
            import tomllib as toml
        except ModuleNotFoundError:
            import tomli as toml
        return toml.loads(text.decode())
    raise ConfigError(f"config must be .json or .toml, got {p.suffix!r}")


def _target_from_config(cfg: dict) -> Target:
    tcfg = cfg.get("target", {})
    if "path" in tcfg:
        return Target.load_json(tcfg["path"])
    name = tcfg.get("name", "stripes")
    try:
        return builtin_target(name)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


def _camera_from_config(cfg: dict) -> CameraParams:
    c = cfg.get("camera", {})
    try:
        return CameraParams(float(c.get("focal", 125.0)),
                            int(c.get("width", 100)), int(c.get("height", 100)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad camera parameters: {exc}") from exc


def _pose_space_from_config(cfg: dict) -> PoseSpace:
    # desk-scale default: the landing scenario halved, angles in degrees
    ps = cfg.get("pose_space", {})
    position = ps.get("position", [[-25.0, 25.0], [-25.0, 75.0], [25.0, 175.0]])
    angles = ps.get("angles_deg", [[0.0, 45.0], [-2.5, 2.5], [-2.5, 2.5]])
    try:
        lo = [b[0] for b in position] + [np.deg2rad(b[0]) for b in angles]
        hi = [b[1] for b in position] + [np.deg2rad(b[1]) for b in angles]
        return PoseSpace(Interval(np.array(lo), np.array(hi)))
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"bad pose_space: {exc}") from exc


def _partition_config(cfg: dict) -> PartitionConfig:
    p = cfg.get("partition", {})
    try:
        return PartitionConfig(
            epsilon_rate=float(p.get("epsilon_rate", 0.45)),
            max_depth=int(p.get("max_depth", 7)),
            split_dims=int(p.get("split_dims", 2)),
            hull=HullConfig(refine=bool(p.get("refine_hull", True))),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_pose(text: str) -> Pose:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 6:
        raise ConfigError("pose must be 'x,y,z,rx_deg,ry_deg,rz_deg'")
    return Pose(parts[0], parts[1], parts[2], *np.deg2rad(parts[3:]).tolist())


def _store_path(args) -> str:
    path = args.store or os.environ.get(STORE_ENV_VAR)
    if not path:
        raise ConfigError(f"no store given: use --store or ${STORE_ENV_VAR}")
    return path


def _cfg_or_empty(args) -> dict:
    return _load_config(args.config) if args.config else {}


# -- subcommands ---------------------------------------------------------------


def cmd_targets(args) -> int:
    for name in builtin_target_names():
        t = builtin_target(name)
        print(f"{name}: {len(t)} polygons, fingerprint {t.fingerprint()[:12]}")
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            t.save_json(Path(args.out) / f"{name}.json")
    if args.out:
        print(f"wrote geometry files to {args.out}")
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = _cfg_or_empty(args)
    target = _target_from_config(cfg) if not args.target else builtin_target(args.target)
    cam = _camera_from_config(cfg)
    out = Path(args.out or "render")
    poses = [_parse_pose(p) for p in args.pose]
    if len(poses) == 1 and out.suffix == ".pbm":
        paths = [out]
    else:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"pose_{i:03d}.pbm" for i in range(len(poses))]
    for pose, path in zip(poses, paths):
        img = render(cam, pose, target)
        img.save_pbm(path, fmt=args.format)
        print(f"{path}: {img.count()} on-pixels")
    return EXIT_OK


def cmd_partition(args) -> int:
    cfg = _cfg_or_empty(args)
    target = _target_from_config(cfg)
    cam = _camera_from_config(cfg)
    space = _pose_space_from_config(cfg)
    records = partition(target, cam, space, _partition_config(cfg))
    print(f"{len(records)} candidate boxes "
          f"({sum(1 for r in records if r.artifacts is None)} unresolved)")
    if args.out:
        boxes = [{"center": r.pose.center.tolist(), "radius": r.pose.radius.tolist(),
                  "errorRatio": None if r.artifacts is None else r.artifacts.error_ratio}
                 for r in records]
        Path(args.out).write_text(json.dumps(boxes, indent=2) + "\n")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_precompute(args) -> int:
    cfg = _cfg_or_empty(args)
    store = precompute_store(_target_from_config(cfg), _camera_from_config(cfg),
                             _pose_space_from_config(cfg), _partition_config(cfg))
    path = _store_path(args)
    store.save(path)
    print(f"store with {len(store)} candidates written to {path}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    store = CandidateStore.load(_store_path(args))
    obs = BinaryImage.load_pbm(args.image)
    est_cfg = EstimateConfig(noise_budget=args.noise,
                             seed=args.seed if args.seed is not None else 0)
    est = estimate(obs, store, est_cfg)
    payload = est.to_json_dict(include_times=not args.stable_output)
    out = args.out or "estimate.json"
    Path(out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(f"candidates {est.candidates_total} -> {est.candidates_after_filter} after filter; "
          f"normalized volume {100 * est.norm_vol_ours:.4f}%; wrote {out}")
    if args.emit_overlay:
        overlay = _overlay_payload(est, store)
        Path(args.emit_overlay).write_text(json.dumps(overlay, sort_keys=True, indent=2) + "\n")
        print(f"wrote overlay {args.emit_overlay}")
    return EXIT_OK


def _overlay_payload(est, store) -> list:
    overlay = []
    for piece in est.pieces:
        art = store.records[piece.candidate_index].artifacts
        if art is None or piece.pose_set.infeasible_flag:
            continue
        boxes = []
        for enclosures in art.vertex_enclosures:
            for ve in enclosures:
                rad = np.abs(ve.lin_gen).sum(axis=1) + np.abs(ve.err_gens).sum(axis=1)
                boxes.append({"center": ve.lin_offset.tolist(), "radius": rad.tolist()})
        overlay.append({"candidateIndex": piece.candidate_index, "vertexBoxes": boxes})
    return overlay


def cmd_experiment(args) -> int:
    cfg = _cfg_or_empty(args)
    exp = cfg.get("experiment", {})
    scenario = ScenarioConfig(
        n_samples=args.samples if args.samples is not None else int(exp.get("samples", 50)),
        noise_budget=args.noise if args.noise is not None else int(exp.get("noise", 0)),
        denoise_input=args.denoise or bool(exp.get("denoise", False)),
        volume_samples=int(exp.get("volume_samples", 20_000)),
        seed=args.seed if args.seed is not None else int(exp.get("seed", 0)),
        stable_output=args.stable_output,
    )
    store_path = args.store or os.environ.get(STORE_ENV_VAR)
    if store_path:
        store = CandidateStore.load(store_path)
    else:
        print("no store given; precomputing one from the configuration", flush=True)
        store = precompute_store(_target_from_config(cfg), _camera_from_config(cfg),
                                 _pose_space_from_config(cfg), _partition_config(cfg))
    out_dir = Path(args.out or "experiment_out")
    out_dir.mkdir(parents=True, exist_ok=True)

    first_scene = {}

    def on_scene(i, pose, obs, est):
        if i == 0:
            first_scene.update(pose=pose, obs=obs, est=est)

    rows = run_experiment(store, scenario, on_scene=on_scene,
                          threads=args.threads, store_path=store_path)
    (out_dir / "experiment.csv").write_text(rows_to_csv(rows, stable=scenario.stable_output))

    from .plots import save_scene_figure, save_volume_figure

    save_volume_figure(rows, out_dir / "volumes.png")
    if first_scene:
        save_scene_figure(first_scene["obs"], first_scene["est"], store,
                          out_dir / "scene_000.png")
    n_contained = sum(r.contained for r in rows)
    print(f"{n_contained}/{len(rows)} ground-truth poses contained; "
          f"outputs in {out_dir}")
    if n_contained != len(rows):
        print("SOUNDNESS VIOLATION: a true pose escaped its certified estimate",
              file=sys.stderr)
        return EXIT_SOUNDNESS
    return EXIT_OK


def cmd_denoise(args) -> int:
    img = BinaryImage.load_pbm(args.input)
    out = denoise(img)
    out.save_pbm(args.output, fmt=args.format)
    print(f"{args.input}: {img.count()} -> {out.count()} on-pixels; wrote {args.output}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="certipose",
        description="Certified camera pose estimation from binary images.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, store=False):
        p.add_argument("--config", help="TOML or JSON configuration file")
        p.add_argument("--seed", type=int, default=None, help="random seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap for batch phases (default 1)")
        p.add_argument("--out", help="output file or directory")
        if store:
            p.add_argument("--store", help=f"candidate store directory "
                           f"(default: ${STORE_ENV_VAR})")

    p = sub.add_parser("targets", help="list built-in targets, optionally export JSON")
    common(p)
    p.set_defaults(func=cmd_targets)

    p = sub.add_parser("render", help="render concrete pose images to PBM")
    common(p)
    p.add_argument("--target", choices=builtin_target_names(), help="built-in target")
    p.add_argument("--pose", action="append", required=True,
                   help="pose as 'x,y,z,rx_deg,ry_deg,rz_deg' (repeatable)")
    p.add_argument("--format", choices=("P1", "P4"), default="P4")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("partition", help="partition pose space into candidate boxes")
    common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("precompute", help="partition and persist a candidate store")
    common(p, store=True)
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("estimate", help="certified estimate for one PBM image")
    common(p, store=True)
    p.add_argument("image", help="observed binary image (PBM)")
    p.add_argument("--noise", type=int, default=0, help="noise budget in pixels")
    p.add_argument("--emit-overlay", help="write vertex-enclosure overlay JSON")
    p.add_argument("--stable-output", action="store_true",
                   help="zero wall-time fields for byte-stable output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="sample scenes, estimate, write CSV + figures")
    common(p, store=True)
    p.add_argument("--samples", type=int, default=None, help="number of scenes")
    p.add_argument("--noise", type=int, default=None, help="noise budget in pixels")
    p.add_argument("--denoise", action="store_true", help="denoise observed images")
    p.add_argument("--stable-output", action="store_true",
                   help="zero wall-time columns for byte-stable CSVs")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("denoise", help="remove isolated on-pixels from a PBM image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--format", choices=("P1", "P4"), default="P4")
    p.set_defaults(func=cmd_denoise)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StoreMismatch, StoreCorrupt) as exc:
        print(f"store error: {exc}", file=sys.stderr)
        return EXIT_STORE_MISMATCH
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertiPoseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
