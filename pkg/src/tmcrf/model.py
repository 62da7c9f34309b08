"""The trained model: weights + feature index + configuration, and its
self-contained text serialization.

File layout (UTF-8, LF)::

    tmcrf-model 1
    config-hash <16 hex>
    topology <binary|extended>
    features <K>
    config-lines <n>
    ... n config lines ...
    group<TAB>key<TAB>context<TAB>index<TAB>weight   (K lines, index order)

The config block makes a model file reusable without the original experiment
file; the hash guards against mismatched or hand-edited blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import (
    ForwardBackwardResult,
    Trellis,
    forward_backward,
    posterior_helix,
    trellis_from_features,
    viterbi,
)
from .config import ExperimentConfig, dump_config, feature_fingerprint, parse_config
from .errors import IncompatibleModelError
from .features import FeatureIndex, FeatureKey, LabelContexts, extract
from .sequence import ProteinRecord
from .states import StateTopology, topology_for

FORMAT_LINE = "tmcrf-model 1"


@dataclass
class CrfModel:
    lam: np.ndarray
    index: FeatureIndex
    config: ExperimentConfig
    topo: StateTopology = field(init=False)
    contexts: LabelContexts = field(init=False)

    def __post_init__(self):
        if self.lam.shape != (self.index.K,):
            raise ValueError(f"weight vector length {self.lam.shape} != K={self.index.K}")
        if not np.all(np.isfinite(self.lam)):
            raise ValueError("weights must be finite")
        self.topo = topology_for(self.config.resolve_topology())
        self.contexts = LabelContexts(self.topo)

    def trellis(self, record: ProteinRecord) -> Trellis:
        rf = extract(record, self.index, self.config.features, self.topo, self.contexts)
        return trellis_from_features(rf, self.lam, self.topo, self.contexts)

    def decode(self, record: ProteinRecord) -> tuple[np.ndarray, str]:
        """(state path, binary label string) for one record."""
        path, labels, _ = viterbi(self.trellis(record), self.topo)
        return path, labels

    def posteriors(self, record: ProteinRecord) -> np.ndarray:
        """Per-position helix marginal probabilities."""
        trellis = self.trellis(record)
        fb: ForwardBackwardResult = forward_backward(trellis)
        return posterior_helix(fb, self.topo)


def build_trellis(record: ProteinRecord, model: CrfModel) -> Trellis:
    return model.trellis(record)


def save_model(model: CrfModel, path: str) -> None:
    config_text = dump_config(model.config)
    config_lines = config_text.splitlines()
    lines = [
        FORMAT_LINE,
        f"config-hash {feature_fingerprint(model.config)}",
        f"topology {model.topo.kind}",
        f"features {model.index.K}",
        f"config-lines {len(config_lines)}",
    ]
    lines.extend(config_lines)
    for i, key in enumerate(model.index.keys):
        lines.append(f"{key.group}\t{key.key}\t{key.context}\t{i}\t{float(model.lam[i])!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path: str) -> CrfModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FORMAT_LINE:
        raise IncompatibleModelError(f"{path}: not a model file (bad format line)")

    header: dict[str, str] = {}
    pos = 1
    for name in ("config-hash", "topology", "features", "config-lines"):
        if pos >= len(lines) or not lines[pos].startswith(name + " "):
            raise IncompatibleModelError(f"{path}: missing header line {name!r}")
        header[name] = lines[pos][len(name) + 1 :]
        pos += 1

    try:
        n_config = int(header["config-lines"])
        n_features = int(header["features"])
    except ValueError:
        raise IncompatibleModelError(f"{path}: non-numeric header counts") from None
    config_block = lines[pos : pos + n_config]
    if len(config_block) != n_config:
        raise IncompatibleModelError(f"{path}: truncated config block")
    pos += n_config
    config = parse_config("\n".join(config_block) + "\n")

    if feature_fingerprint(config) != header["config-hash"]:
        raise IncompatibleModelError(f"{path}: config hash mismatch (edited or mixed model file)")
    if config.resolve_topology() != header["topology"]:
        raise IncompatibleModelError(f"{path}: topology header disagrees with config block")

    feature_lines = lines[pos:]
    if len(feature_lines) != n_features:
        raise IncompatibleModelError(
            f"{path}: expected {n_features} feature lines, found {len(feature_lines)}"
        )
    keys: list[FeatureKey] = []
    weights = np.empty(n_features)
    for lineno, line in enumerate(feature_lines):
        parts = line.split("\t")
        if len(parts) != 5:
            raise IncompatibleModelError(f"{path}: feature line {lineno}: expected 5 fields")
        group, key, context, idx, weight = parts
        try:
            index_field = int(idx)
            weights[lineno] = float(weight)
        except ValueError:
            raise IncompatibleModelError(
                f"{path}: feature line {lineno}: non-numeric index or weight"
            ) from None
        if index_field != lineno:
            raise IncompatibleModelError(f"{path}: feature line {lineno}: bad index {idx}")
        keys.append(FeatureKey(group, key, context))

    index = FeatureIndex(keys)
    if list(index.keys) != keys:
        raise IncompatibleModelError(f"{path}: feature lines not in canonical order")
    return CrfModel(lam=weights, index=index, config=config)
