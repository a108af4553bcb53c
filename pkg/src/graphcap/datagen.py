"""Synthetic video corpus: moving colored shapes on a cell grid.

Every video is a sequence of feature grids (one vector per cell). Shapes sit
on single cells, move by a scripted per-frame offset (toroidal wrap), and are
described by template captions, per-frame scene-graph triplets and ground
truth cell regions for every mentioned shape. The whole corpus is a pure
function of the generator spec, byte-identical across runs.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .featureio import read_feature_file, write_feature_file

PREDICATES = ["left-of", "right-of", "above", "below", "overlaps"]

DEFAULT_SHAPES = ["square", "circle", "triangle", "star"]
DEFAULT_COLORS = ["red", "blue", "green", "yellow"]

# phrase tokens plus the per-frame cell offset they describe
DEFAULT_MOTIONS = [
    ("moves left", -1, 0),
    ("moves right", 1, 0),
    ("drifts up", 0, -1),
    ("slides down", 0, 1),
]


@dataclass(frozen=True)
class GeneratorSpec:
    num_videos: int = 16
    frames_per_video: int = 6
    grid_side: int = 4
    shape_classes: tuple = tuple(DEFAULT_SHAPES)
    color_classes: tuple = tuple(DEFAULT_COLORS)
    motion_templates: tuple = tuple(DEFAULT_MOTIONS)
    seed: int = 7
    captions_per_video: int = 2
    noise_scale: float = 0.05
    extra_channels: int = 2

    def validate(self):
        for name in ("num_videos", "frames_per_video", "grid_side", "captions_per_video"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if not self.shape_classes:
            raise ValidationError("at least one shape class required")
        if not self.color_classes:
            raise ValidationError("at least one color class required")
        if not self.motion_templates:
            raise ValidationError("at least one motion template required")

    @property
    def feature_channels(self):
        return len(self.shape_classes) + len(self.color_classes) + self.extra_channels


@dataclass(frozen=True)
class SceneObject:
    id: int
    cls: str
    box: tuple  # (x1, y1, x2, y2) in cell coordinates, x1 < x2, y1 < y2


@dataclass(frozen=True)
class SceneTriplet:
    subj: int
    pred: str
    obj: int


@dataclass
class FrameScene:
    frame: int
    objects: list
    triplets: list


@dataclass
class VideoRecord:
    id: str
    frames: np.ndarray  # (F, G, D_c) float32, G = grid_side**2 row-major cells
    context_features: dict  # stream name -> 1-D float32 vector
    captions: list  # list of token lists
    scene_graphs: list  # FrameScene per frame
    gt_regions: list = None  # per frame: {class: bool mask of length G} or None

    @property
    def num_frames(self):
        return self.frames.shape[0]

    @property
    def grid_cells(self):
        return self.frames.shape[1]


def select_keyframes(frames, n):
    """Indices of the min(n, F) frames with largest L1 difference to their
    predecessor (d_0 = 0), ties to the smaller index, returned in temporal
    order."""
    frames = np.asarray(frames)
    if frames.shape[0] < 1:
        raise ValidationError("need at least one frame")
    if n < 1:
        raise ValidationError("n must be >= 1")
    diffs = frame_differences(frames)
    take = min(n, len(diffs))
    ranked = sorted(range(len(diffs)), key=lambda t: (-diffs[t], t))
    return sorted(ranked[:take])


def frame_differences(frames):
    """d_t = sum of |frame_t - frame_{t-1}| over all cells; d_0 = 0."""
    frames = np.asarray(frames, dtype=np.float64)
    out = np.zeros(frames.shape[0])
    if frames.shape[0] > 1:
        flat = frames.reshape(frames.shape[0], -1)
        out[1:] = np.abs(flat[1:] - flat[:-1]).sum(axis=1)
    return out


def _relation(pos_a, pos_b):
    dx = pos_b[0] - pos_a[0]
    dy = pos_b[1] - pos_a[1]
    if dx == 0 and dy == 0:
        return "overlaps"
    if abs(dx) >= abs(dy):
        return "left-of" if dx > 0 else "right-of"
    return "above" if dy > 0 else "below"


def _render_video(spec, rng, index):
    side = spec.grid_side
    cells = side * side
    n_shapes = len(spec.shape_classes)
    n_colors = len(spec.color_classes)
    channels = spec.feature_channels

    shape_ids = rng.choice(n_shapes, size=min(2, n_shapes), replace=False)
    if len(shape_ids) == 1:
        shape_ids = np.array([shape_ids[0], shape_ids[0]])
    color_ids = rng.choice(n_colors, size=2, replace=n_colors < 2)
    motion_ids = rng.choice(len(spec.motion_templates), size=2, replace=True)
    start_cells = rng.choice(cells, size=2, replace=False) if cells >= 2 else np.zeros(2, int)

    objects = []
    for k in range(2):
        objects.append(
            {
                "shape": spec.shape_classes[int(shape_ids[k])],
                "shape_id": int(shape_ids[k]),
                "color": spec.color_classes[int(color_ids[k])],
                "color_id": int(color_ids[k]),
                "motion": spec.motion_templates[int(motion_ids[k])],
                "pos": (int(start_cells[k]) % side, int(start_cells[k]) // side),
            }
        )

    frames = rng.normal(0.0, spec.noise_scale, size=(spec.frames_per_video, cells, channels))
    frames = frames.astype(np.float32)
    scenes = []
    positions = [[None, None] for _ in range(spec.frames_per_video)]
    for t in range(spec.frames_per_video):
        scene_objects = []
        for k, obj in enumerate(objects):
            _, dx, dy = obj["motion"]
            x = (obj["pos"][0] + t * dx) % side
            y = (obj["pos"][1] + t * dy) % side
            positions[t][k] = (x, y)
            cell = y * side + x
            frames[t, cell, obj["shape_id"]] += 1.0
            frames[t, cell, n_shapes + obj["color_id"]] += 1.0
            scene_objects.append(SceneObject(id=k, cls=obj["shape"], box=(x, y, x + 1, y + 1)))
        pred = _relation(positions[t][0], positions[t][1])
        scenes.append(
            FrameScene(frame=t, objects=scene_objects, triplets=[SceneTriplet(0, pred, 1)])
        )

    captions = _compose_captions(spec, objects)
    mentioned = {tok for cap in captions for tok in cap} & set(spec.shape_classes)

    gt_regions = []
    for t in range(spec.frames_per_video):
        region = {}
        for k, obj in enumerate(objects):
            if obj["shape"] not in mentioned:
                continue
            mask = np.zeros(cells, dtype=bool)
            x, y = positions[t][k]
            mask[y * side + x] = True
            if obj["shape"] in region:
                region[obj["shape"]] |= mask
            else:
                region[obj["shape"]] = mask
        gt_regions.append(region)

    context = {
        "appearance": frames.mean(axis=(0, 1)).astype(np.float32),
        "motion": np.abs(np.diff(frames, axis=0)).mean(axis=(0, 1)).astype(np.float32)
        if spec.frames_per_video > 1
        else np.zeros(channels, dtype=np.float32),
    }

    return VideoRecord(
        id=f"video{index:04d}",
        frames=frames,
        context_features=context,
        captions=captions,
        scene_graphs=scenes,
        gt_regions=gt_regions,
    )


def _compose_captions(spec, objects):
    a, b = objects
    both = (
        f"{a['color']} {a['shape']} {a['motion'][0]} and {b['color']} {b['shape']} {b['motion'][0]}"
    )
    single_a = f"a {a['color']} {a['shape']} {a['motion'][0]}"
    single_b = f"a {b['color']} {b['shape']} {b['motion'][0]}"
    pool = [both, single_a, single_b]
    captions = [pool[i % len(pool)] for i in range(spec.captions_per_video)]
    return [c.split() for c in captions]


def generate_corpus(spec, out_dir):
    """Write the corpus under ``out_dir`` and return the manifest path."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    out_dir = os.path.abspath(out_dir)
    os.makedirs(os.path.join(out_dir, "videos"), exist_ok=True)

    manifest = {"grid_side": spec.grid_side, "videos": []}
    for i in range(spec.num_videos):
        record = _render_video(spec, rng, i)
        vdir = os.path.join(out_dir, "videos", record.id)
        os.makedirs(vdir, exist_ok=True)

        write_feature_file(os.path.join(vdir, "frames.cmgf"), record.frames)
        context_entry = {}
        for stream in sorted(record.context_features):
            fname = f"context_{stream}.cmgf"
            write_feature_file(os.path.join(vdir, fname), record.context_features[stream])
            context_entry[stream] = f"videos/{record.id}/{fname}"

        sg_path = os.path.join(vdir, "scene_graphs.jsonl")
        write_scene_graphs(sg_path, record.scene_graphs)

        gt_path = os.path.join(vdir, "gt_regions.json")
        _write_gt_regions(gt_path, record.gt_regions)

        manifest["videos"].append(
            {
                "id": record.id,
                "captions": [" ".join(c) for c in record.captions],
                "frames": f"videos/{record.id}/frames.cmgf",
                "context": context_entry,
                "scene_graphs": f"videos/{record.id}/scene_graphs.jsonl",
                "gt_regions": f"videos/{record.id}/gt_regions.json",
            }
        )

    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def write_scene_graphs(path, scenes):
    with open(path, "w", encoding="utf-8") as fh:
        for scene in scenes:
            row = {
                "frame": scene.frame,
                "objects": [
                    {"id": o.id, "class": o.cls, "box": list(o.box)} for o in scene.objects
                ],
                "triplets": [
                    {"subj": t.subj, "pred": t.pred, "obj": t.obj} for t in scene.triplets
                ],
            }
            fh.write(json.dumps(row, sort_keys=True))
            fh.write("\n")


def read_scene_graphs(path):
    scenes = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            scenes.append(
                FrameScene(
                    frame=row["frame"],
                    objects=[
                        SceneObject(id=o["id"], cls=o["class"], box=tuple(o["box"]))
                        for o in row["objects"]
                    ],
                    triplets=[
                        SceneTriplet(t["subj"], t["pred"], t["obj"]) for t in row["triplets"]
                    ],
                )
            )
    return scenes


def _write_gt_regions(path, gt_regions):
    doc = {}
    for t, region in enumerate(gt_regions):
        doc[str(t)] = {cls: np.flatnonzero(mask).tolist() for cls, mask in sorted(region.items())}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_gt_regions(path, cells):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    out = []
    for t in sorted(doc, key=int):
        region = {}
        for cls, idxs in doc[t].items():
            mask = np.zeros(cells, dtype=bool)
            mask[idxs] = True
            region[cls] = mask
        out.append(region)
    return out


def load_corpus(manifest_path):
    """Load every VideoRecord referenced by a manifest."""
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    records = []
    for entry in manifest["videos"]:
        frames = read_feature_file(os.path.join(base, entry["frames"]))
        context = {
            stream: read_feature_file(os.path.join(base, rel))
            for stream, rel in entry["context"].items()
        }
        scenes = read_scene_graphs(os.path.join(base, entry["scene_graphs"]))
        gt = None
        if entry.get("gt_regions"):
            gt = _read_gt_regions(os.path.join(base, entry["gt_regions"]), frames.shape[1])
        records.append(
            VideoRecord(
                id=entry["id"],
                frames=frames,
                context_features=context,
                captions=[c.split() for c in entry["captions"]],
                scene_graphs=scenes,
                gt_regions=gt,
            )
        )
    return records


def corpus_fingerprint(out_dir):
    """SHA-256 over every file in the corpus directory, for determinism checks."""
    digest = hashlib.sha256()
    for root, dirs, files in os.walk(out_dir):
        dirs.sort()
        for name in sorted(files):
            path = os.path.join(root, name)
            digest.update(os.path.relpath(path, out_dir).encode())
            with open(path, "rb") as fh:
                digest.update(fh.read())
    return digest.hexdigest()
