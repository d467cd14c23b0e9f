"""JSON and CSV formats for spectra, embeddings and distance matrices."""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .errors import InputError
from .models import ManifoldModel, PointCloud, embed_points
from .spectra import ScalarSpectrum, TangentSpectrum
from .vdm import VdmEmbedding

SPEC_VERSION = "vectorheat-spec-1"


def cloud_to_dict(cloud: PointCloud) -> dict:
    return {
        "model": cloud.model.to_dict(),
        "points": cloud.points.tolist(),
        "frames": cloud.frames.tolist(),
        "weights": cloud.weights.tolist(),
        "strategy": cloud.strategy,
        "fallback": cloud.fallback,
    }


def cloud_from_dict(data: dict) -> PointCloud:
    try:
        model = ManifoldModel.from_dict(data["model"])
        points = np.asarray(data["points"], dtype=float).reshape(-1, model.dim)
        frames = np.asarray(data["frames"], dtype=float)
        weights = np.asarray(data["weights"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed point cloud: {exc}") from exc
    ambient, exact_frames = embed_points(model, points)
    if frames.shape != exact_frames.shape or weights.shape != (len(points),):
        raise InputError("frames or weights do not match the points")
    gram = np.einsum("iap,ibp->iab", frames, frames)
    if not np.allclose(gram, np.eye(model.dim), atol=1e-12, rtol=0):
        raise InputError("frames are not orthonormal")
    return PointCloud(model, points, frames, weights, ambient, data.get("strategy", "grid"), data.get("fallback"))


def spectra_to_dict(tangent: TangentSpectrum, scalar: ScalarSpectrum | None = None) -> dict:
    """Spectral-data document; the scalar spectrum (if any) shares the cloud."""
    out = {"version": SPEC_VERSION}
    out.update(cloud_to_dict(tangent.cloud))
    out.update(
        {
            "source": tangent.source,
            "group_rtol": tangent.group_rtol,
            "eigenvalues": tangent.eigenvalues.tolist(),
            "multiplicities": tangent.multiplicities.tolist(),
            "fields": tangent.fields.tolist(),
            "meta": tangent.meta,
        }
    )
    if scalar is not None:
        if scalar.cloud is not tangent.cloud and scalar.n != tangent.n:
            raise InputError("scalar and tangent spectra live on different clouds")
        out["scalar"] = {
            "source": scalar.source,
            "group_rtol": scalar.group_rtol,
            "eigenvalues": scalar.eigenvalues.tolist(),
            "functions": scalar.functions.tolist(),
        }
    return out


def spectra_from_dict(data: dict) -> tuple[TangentSpectrum, ScalarSpectrum | None]:
    if not isinstance(data, dict):
        raise InputError("spectral data must be a JSON object")
    if data.get("version") != SPEC_VERSION:
        raise InputError(f"unsupported spectral-data version {data.get('version')!r}")
    cloud = cloud_from_dict(data)
    try:
        tangent = TangentSpectrum(
            np.asarray(data["eigenvalues"], dtype=float),
            np.asarray(data["fields"], dtype=float),
            cloud,
            data.get("source", "analytic"),
            float(data.get("group_rtol", 1e-9)),
            dict(data.get("meta", {})),
        )
    except KeyError as exc:
        raise InputError(f"spectral data lacks {exc}") from exc
    if "multiplicities" in data and list(tangent.multiplicities) != list(data["multiplicities"]):
        raise InputError("stored multiplicities disagree with the eigenvalue grouping")
    scalar = None
    if "scalar" in data:
        sd = data["scalar"]
        try:
            scalar = ScalarSpectrum(
                np.asarray(sd["eigenvalues"], dtype=float),
                np.asarray(sd["functions"], dtype=float),
                cloud,
                sd.get("source", "analytic"),
                float(sd.get("group_rtol", 1e-9)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed scalar spectrum: {exc}") from exc
    return tangent, scalar


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj) + "\n")


def save_spectra(path, tangent: TangentSpectrum, scalar: ScalarSpectrum | None = None) -> None:
    _write_json(path, spectra_to_dict(tangent, scalar))


def load_spectra(path) -> tuple[TangentSpectrum, ScalarSpectrum | None]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read spectral data {path}: {exc}") from exc
    return spectra_from_dict(data)


def embedding_to_dict(emb: VdmEmbedding) -> dict:
    return {
        "t": emb.t,
        "K": emb.K,
        "volume": emb.volume,
        "pairs": emb.pairs.tolist(),
        "points": emb.points.tolist(),
        "coords": emb.coords.tolist(),
        "tail_sq": emb.tail_sq.tolist(),
    }


def save_embedding(path, emb: VdmEmbedding) -> None:
    _write_json(path, embedding_to_dict(emb))


def write_csv(path, rows, header=None) -> None:
    """Write rows with every float rounded to 12 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv_matrix(path) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array([[float(v) for v in row] for row in csv.reader(fh) if row])


def cache_dir() -> Path | None:
    """Spectra cache directory from ``VECTORHEAT_CACHE`` (None when unset)."""
    root = os.environ.get("VECTORHEAT_CACHE")
    if not root:
        return None
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path
