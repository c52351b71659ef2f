"""Versioned on-disk artifacts for fitted models.

A single container format holds a JSON manifest plus raw little-endian
array payloads. Writes are byte-deterministic (sorted keys, repr floats, no
timestamps) so reruns with identical inputs produce identical files.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .classifiers import KnnClassifier, LinearSvmClassifier, RandomForestClassifier, _Tree
from .errors import IoError, ParseError
from .model import LabelCodec
from .pca import PcaModel
from .pipeline import DvfsFeatureParams, EmFeatureParams
from .spectral import FeatureLayout, SliceSpec
from .util import atomic_write_bytes

_MAGIC = b"FPAF"
_VERSION = 1


def write_artifact(path, meta: dict, arrays: dict) -> None:
    names = sorted(arrays)
    specs = []
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(arrays[name])
        arr = arr.astype(arr.dtype.newbyteorder("<"))
        specs.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    manifest = json.dumps(
        {"meta": meta, "arrays": specs}, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    payload = b"".join(
        [_MAGIC, struct.pack("<IQ", _VERSION, len(manifest)), manifest, *blobs]
    )
    atomic_write_bytes(path, payload)


def read_artifact(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if raw[:4] != _MAGIC:
        raise ParseError(path, 0, "not a freqprint artifact")
    version, manifest_len = struct.unpack_from("<IQ", raw, 4)
    if version != _VERSION:
        raise ParseError(path, 0, f"unsupported artifact version {version}")
    offset = 4 + 12
    manifest = json.loads(raw[offset : offset + manifest_len].decode("utf-8"))
    offset += manifest_len
    arrays = {}
    for spec in manifest["arrays"]:
        dtype = np.dtype(spec["dtype"])
        count = int(np.prod(spec["shape"], dtype=np.int64)) if spec["shape"] else 1
        nbytes = dtype.itemsize * count
        if offset + nbytes > len(raw):
            raise ParseError(path, 0, f"truncated payload for {spec['name']}")
        arr = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
        arrays[spec["name"]] = arr.reshape(spec["shape"])
        offset += nbytes
    return manifest["meta"], arrays


def _layout_to_list(layout: FeatureLayout):
    return [[s.start, s.stop, s.window, s.block] for s in layout.slices]


def _layout_from_list(raw) -> FeatureLayout:
    return FeatureLayout(tuple(SliceSpec(*map(int, item)) for item in raw))


def _pca_payload(model: PcaModel, prefix: str = "pca"):
    meta = {
        "layout": _layout_to_list(model.layout),
        "kept": model.kept_per_window,
    }
    arrays = {}
    for i, (mean, comps, var, frac) in enumerate(
        zip(model.means, model.components, model.explained_variance, model.explained_fraction)
    ):
        arrays[f"{prefix}/mean{i:04d}"] = mean
        arrays[f"{prefix}/comp{i:04d}"] = comps
        arrays[f"{prefix}/evar{i:04d}"] = var
        arrays[f"{prefix}/efrac{i:04d}"] = frac
    return meta, arrays


def _pca_from_payload(meta, arrays, prefix: str = "pca") -> PcaModel:
    layout = _layout_from_list(meta["layout"])
    n = len(layout.slices)
    means, comps, evars, efracs = [], [], [], []
    for i in range(n):
        means.append(np.array(arrays[f"{prefix}/mean{i:04d}"], dtype=np.float64))
        comp = np.array(arrays[f"{prefix}/comp{i:04d}"], dtype=np.float64)
        comps.append(comp)
        evars.append(np.array(arrays[f"{prefix}/evar{i:04d}"], dtype=np.float64))
        efracs.append(np.array(arrays[f"{prefix}/efrac{i:04d}"], dtype=np.float64))
        if comp.shape[0]:
            gram = comp @ comp.T
            if not np.allclose(gram, np.eye(comp.shape[0]), atol=1e-6):
                raise ParseError("pca", i, "stored components are not orthonormal")
    model = PcaModel(
        layout=layout,
        means=tuple(means),
        components=tuple(comps),
        explained_variance=tuple(evars),
        explained_fraction=tuple(efracs),
    )
    if model.kept_per_window != list(meta["kept"]):
        raise ParseError("pca", 0, "kept-component counts disagree with payload")
    return model


def save_pca(model: PcaModel, path) -> None:
    meta, arrays = _pca_payload(model)
    write_artifact(path, {"kind": "pca", "pca": meta}, arrays)


def load_pca(path) -> PcaModel:
    meta, arrays = read_artifact(path)
    if meta.get("kind") != "pca":
        raise ParseError(path, 0, f"expected a pca artifact, got {meta.get('kind')}")
    return _pca_from_payload(meta["pca"], arrays)


def _classifier_payload(model, prefix: str = "clf"):
    arrays = {}
    if isinstance(model, KnnClassifier):
        meta = {"kind": "knn", "k": model.k}
        arrays[f"{prefix}/train_rows"] = model.train_rows_
        arrays[f"{prefix}/train_labels"] = model.train_labels_
    elif isinstance(model, LinearSvmClassifier):
        meta = {"kind": "svm", "c": model.c, "epochs": model.epochs, "seed": model.seed}
        arrays[f"{prefix}/weights"] = model.weights_
        arrays[f"{prefix}/biases"] = model.biases_
        arrays[f"{prefix}/classes"] = model.classes_
    elif isinstance(model, RandomForestClassifier):
        meta = {
            "kind": "rf",
            "n_estimators": model.n_estimators,
            "seed": model.seed,
            "bootstrap": model.bootstrap,
            "max_features": model.max_features,
        }
        arrays[f"{prefix}/classes"] = model.classes_
        for i, tree in enumerate(model.trees_):
            arrays[f"{prefix}/t{i:04d}/feature"] = tree.feature
            arrays[f"{prefix}/t{i:04d}/threshold"] = tree.threshold
            arrays[f"{prefix}/t{i:04d}/left"] = tree.left
            arrays[f"{prefix}/t{i:04d}/right"] = tree.right
            arrays[f"{prefix}/t{i:04d}/dist"] = tree.dist
    else:
        raise ValueError(f"cannot serialize {type(model).__name__}")
    return meta, arrays


def _classifier_from_payload(meta, arrays, prefix: str = "clf"):
    kind = meta["kind"]
    if kind == "knn":
        model = KnnClassifier(k=int(meta["k"]))
        model.fit(
            np.array(arrays[f"{prefix}/train_rows"], dtype=np.float64),
            np.array(arrays[f"{prefix}/train_labels"], dtype=np.int64),
        )
        return model
    if kind == "svm":
        model = LinearSvmClassifier(
            c=float(meta["c"]), epochs=int(meta["epochs"]), seed=int(meta["seed"])
        )
        model.classes_ = np.array(arrays[f"{prefix}/classes"], dtype=np.int64)
        model.weights_ = np.array(arrays[f"{prefix}/weights"], dtype=np.float64)
        model.biases_ = np.array(arrays[f"{prefix}/biases"], dtype=np.float64)
        model.n_features_in_ = model.weights_.shape[1]
        return model
    if kind == "rf":
        model = RandomForestClassifier(
            n_estimators=int(meta["n_estimators"]),
            seed=int(meta["seed"]),
            bootstrap=bool(meta["bootstrap"]),
            max_features=meta["max_features"],
        )
        model.classes_ = np.array(arrays[f"{prefix}/classes"], dtype=np.int64)
        trees = []
        for i in range(model.n_estimators):
            trees.append(
                _Tree(
                    feature=np.array(arrays[f"{prefix}/t{i:04d}/feature"], dtype=np.intp),
                    threshold=np.array(arrays[f"{prefix}/t{i:04d}/threshold"], dtype=np.float64),
                    left=np.array(arrays[f"{prefix}/t{i:04d}/left"], dtype=np.intp),
                    right=np.array(arrays[f"{prefix}/t{i:04d}/right"], dtype=np.intp),
                    dist=np.array(arrays[f"{prefix}/t{i:04d}/dist"], dtype=np.float64),
                )
            )
        model.trees_ = trees
        model.n_features_in_ = int(meta["n_features_in"])
        return model
    raise ParseError("classifier", 0, f"unknown classifier kind {kind!r}")


def save_classifier(model, path) -> None:
    meta, arrays = _classifier_payload(model)
    if meta["kind"] == "rf":
        meta["n_features_in"] = model.n_features_in_
    write_artifact(path, {"kind": "classifier", "clf": meta}, arrays)


def load_classifier(path):
    meta, arrays = read_artifact(path)
    if meta.get("kind") != "classifier":
        raise ParseError(path, 0, f"expected a classifier artifact, got {meta.get('kind')}")
    return _classifier_from_payload(meta["clf"], arrays)


def save_bundle(path, pipeline: str, feature_params, codec: LabelCodec, pca_model: PcaModel, classifier) -> None:
    """Everything needed to score a corpus later: params, codec, PCA, model."""
    pca_meta, pca_arrays = _pca_payload(pca_model)
    clf_meta, clf_arrays = _classifier_payload(classifier)
    if clf_meta["kind"] == "rf":
        clf_meta["n_features_in"] = classifier.n_features_in_
    params = {
        "duration_s": feature_params.duration_s,
        "n_windows": feature_params.n_windows,
        "taper": feature_params.taper,
    }
    if isinstance(feature_params, DvfsFeatureParams):
        params["dt_us"] = feature_params.dt_us
    meta = {
        "kind": "bundle",
        "pipeline": pipeline,
        "feature_params": params,
        "classes": list(codec.classes),
        "pca": pca_meta,
        "clf": clf_meta,
    }
    write_artifact(path, meta, {**pca_arrays, **clf_arrays})


def load_bundle(path):
    meta, arrays = read_artifact(path)
    if meta.get("kind") != "bundle":
        raise ParseError(path, 0, f"expected a bundle artifact, got {meta.get('kind')}")
    params_raw = meta["feature_params"]
    if meta["pipeline"] == "em-freq":
        feature_params = EmFeatureParams(
            duration_s=params_raw["duration_s"],
            n_windows=int(params_raw["n_windows"]),
            taper=params_raw["taper"],
        )
    else:
        feature_params = DvfsFeatureParams(
            dt_us=int(params_raw["dt_us"]),
            duration_s=params_raw["duration_s"],
            n_windows=int(params_raw["n_windows"]),
            taper=params_raw["taper"],
        )
    return {
        "pipeline": meta["pipeline"],
        "feature_params": feature_params,
        "codec": LabelCodec(tuple(meta["classes"])),
        "pca": _pca_from_payload(meta["pca"], arrays),
        "classifier": _classifier_from_payload(meta["clf"], arrays),
    }
