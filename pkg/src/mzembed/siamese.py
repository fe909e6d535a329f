"""Siamese similarity training: Tanimoto labels, uniform pair sampling,
cosine-vs-label loss, and the training loop."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .data.types import MoleculeRecord, Spectrum
from .embed.precision import BINARY64, PrecisionMode
from .encoder import EncoderConfig, ModelWeights, encode_batch, init_weights
from .errors import ConfigError, DataError, DimensionError
from .rng import stream_rng
from .tensor import Tensor, cosine_similarity, no_grad
from .training import TrainConfig, TrainLog, apply_step, make_optimizer

DEFAULT_BIN_COUNT = 10
EXACT_ENUMERATION_LIMIT = 2000


def tanimoto(a: np.ndarray, b: np.ndarray) -> float:
    """|a AND b| / |a OR b| over bit arrays; two empty sets give 0."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise DimensionError(
            f"fingerprint widths differ: {a.shape} vs {b.shape}"
        )
    union = int(np.sum(a | b))
    if union == 0:
        return 0.0
    return int(np.sum(a & b)) / union


@dataclass(frozen=True)
class PairSample:
    """A labeled spectrum pair; the label is symmetric in (a, b)."""

    a: str
    b: str
    label: float

    def __post_init__(self):
        if not 0.0 <= self.label <= 1.0:
            raise DataError(f"pair label must be in [0, 1], got {self.label}")


@dataclass
class SimilarityBins:
    """Equal-width Tanimoto bins over structure pairs.

    Bin k covers [k/B, (k+1)/B), except the last bin which also owns
    the boundary value 1.0. Reservoirs hold (structure_a, structure_b,
    tanimoto) triples; self-pairs (s, s) are included so the top bin is
    always reachable for structures with at least one spectrum.
    """

    bin_count: int
    reservoirs: list[list[tuple[str, str, float]]]

    @property
    def unreachable(self) -> list[int]:
        return [k for k, r in enumerate(self.reservoirs) if not r]


def bin_of(label: float, bin_count: int) -> int:
    return min(int(label * bin_count), bin_count - 1)


def build_similarity_bins(
    molecules: dict[str, MoleculeRecord],
    structures: list[str],
    bin_count: int = DEFAULT_BIN_COUNT,
    exact_limit: int = EXACT_ENUMERATION_LIMIT,
    seed: int = 0,
    rejection_target: int = 1000,
    rejection_max_draws: int = 500_000,
) -> SimilarityBins:
    """Precompute per-bin reservoirs of structure pairs.

    Up to ``exact_limit`` structures all unordered pairs (self-pairs
    included) are enumerated; beyond that, pairs are rejection-sampled
    until every bin reaches ``rejection_target`` entries or the draw
    budget runs out. Bins still empty afterwards are unreachable and
    reported by the sampler.
    """
    if bin_count < 1:
        raise ConfigError(f"bin count must be positive, got {bin_count}")
    names = sorted(set(structures))
    missing = [s for s in names if s not in molecules]
    if missing:
        raise DataError(f"no molecule records for structures: {missing}")
    reservoirs: list[list[tuple[str, str, float]]] = [[] for _ in range(bin_count)]

    if len(names) <= exact_limit:
        for i, sa in enumerate(names):
            fa = molecules[sa].fingerprint
            for sb in names[i:]:
                t = tanimoto(fa, molecules[sb].fingerprint)
                reservoirs[bin_of(t, bin_count)].append((sa, sb, t))
        return SimilarityBins(bin_count=bin_count, reservoirs=reservoirs)

    rng = stream_rng(seed, "pairs", 0xB1)
    draws = 0
    while draws < rejection_max_draws and any(
        len(r) < rejection_target for r in reservoirs
    ):
        i = int(rng.integers(len(names)))
        j = int(rng.integers(len(names)))
        if j < i:
            i, j = j, i
        sa, sb = names[i], names[j]
        t = tanimoto(molecules[sa].fingerprint, molecules[sb].fingerprint)
        k = bin_of(t, bin_count)
        if len(reservoirs[k]) < rejection_target:
            reservoirs[k].append((sa, sb, t))
        draws += 1
    return SimilarityBins(bin_count=bin_count, reservoirs=reservoirs)


def sample_uniform_pairs(
    molecules: dict[str, MoleculeRecord],
    spectra: list[Spectrum],
    bins: SimilarityBins,
    count: int,
    seed,
) -> list[PairSample]:
    """Sample spectrum pairs whose labels are uniform over reachable bins.

    Each draw picks a reachable bin uniformly, a structure pair from
    that bin's reservoir uniformly, then one spectrum per structure
    uniformly. ``seed`` may be an integer or a prepared Generator.
    """
    if count < 0:
        raise ConfigError(f"pair count must be non-negative, got {count}")
    rng = seed if isinstance(seed, np.random.Generator) else stream_rng(seed, "pairs")

    spectra_of: dict[str, list[str]] = {}
    for s in sorted(spectra, key=lambda x: x.id):
        if s.structure_id is not None:
            spectra_of.setdefault(s.structure_id, []).append(s.id)

    usable: list[list[tuple[str, str, float]]] = []
    for reservoir in bins.reservoirs:
        usable.append(
            [e for e in reservoir if e[0] in spectra_of and e[1] in spectra_of]
        )
    reachable = [k for k, r in enumerate(usable) if r]
    if count > 0 and not reachable:
        raise DataError(
            "no similarity bin is reachable with the given spectra "
            f"(unreachable bins: {list(range(bins.bin_count))})"
        )

    out: list[PairSample] = []
    for _ in range(count):
        k = reachable[int(rng.integers(len(reachable)))]
        sa, sb, label = usable[k][int(rng.integers(len(usable[k])))]
        ids_a = spectra_of[sa]
        ids_b = spectra_of[sb]
        a = ids_a[int(rng.integers(len(ids_a)))]
        b = ids_b[int(rng.integers(len(ids_b)))]
        out.append(PairSample(a=a, b=b, label=label))
    return out


def siamese_loss(emb_a: Tensor, emb_b: Tensor, labels) -> Tensor:
    """Mean squared error between pairwise cosine and the Tanimoto label.

    Accepts (d,) vectors or (B, d) batches; labels broadcast to match.
    """
    cos = cosine_similarity(emb_a, emb_b)
    if isinstance(labels, Tensor):
        labels = labels.data
    target = Tensor(np.asarray(labels, dtype=np.float64))
    diff = cos - target
    return (diff * diff).mean() if diff.ndim else diff * diff


def _pair_mse(
    pairs: list[PairSample],
    by_id: dict[str, Spectrum],
    cfg: EncoderConfig,
    weights: ModelWeights,
    sin_cfg,
    vocab,
    precision: PrecisionMode,
    batch_size: int,
) -> float:
    """Inference-mode pair MSE, averaged over all pairs."""
    if not pairs:
        return float("nan")
    total = 0.0
    with no_grad():
        for start in range(0, len(pairs), batch_size):
            chunk = pairs[start : start + batch_size]
            spectra = [by_id[p.a] for p in chunk] + [by_id[p.b] for p in chunk]
            embs = encode_batch(
                spectra, cfg, weights, sin_cfg=sin_cfg, vocab=vocab,
                mode="infer", precision=precision,
            )
            half = len(chunk)
            labels = np.array([p.label for p in chunk], dtype=np.float64)
            loss = siamese_loss(embs[:half], embs[half:], labels)
            total += float(loss.data) * half
    return total / len(pairs)


def train_siamese(
    train_spectra: list[Spectrum],
    molecules: dict[str, MoleculeRecord],
    trn_cfg: TrainConfig,
    enc_cfg: EncoderConfig,
    sin_cfg=None,
    vocab=None,
    precision: PrecisionMode = BINARY64,
    eval_sets: dict[str, list[Spectrum]] | None = None,
    weights: ModelWeights | None = None,
) -> tuple[ModelWeights, TrainLog]:
    """Train twin encoders with shared weights on uniform-similarity pairs.

    ``eval_sets`` maps split names ("known", "novel") to normalized
    held-out spectra; their pair MSE is logged every epoch from a fixed
    pair sample. Returns the trained weights and the epoch log.
    """
    import dataclasses

    enc_cfg = dataclasses.replace(enc_cfg, dropout=trn_cfg.dropout)
    eval_sets = eval_sets or {}
    by_id = {s.id: s for s in train_spectra}
    if len(by_id) != len(train_spectra):
        raise DataError("duplicate spectrum ids in training data")

    train_structures = sorted(
        {s.structure_id for s in train_spectra if s.structure_id is not None}
    )
    if not train_structures:
        raise DataError("no labeled structures in the training spectra")
    bins = build_similarity_bins(molecules, train_structures, seed=trn_cfg.seed)

    if weights is None:
        weights = init_weights(enc_cfg, seed=trn_cfg.seed, vocab=vocab)
    params = weights.trainable()
    adam = make_optimizer(params, trn_cfg)

    eval_pairs: dict[str, tuple[list[PairSample], dict[str, Spectrum]]] = {}
    for name in sorted(eval_sets):
        spectra = eval_sets[name]
        eval_by_id = {s.id: s for s in spectra}
        structures = sorted(
            {s.structure_id for s in spectra if s.structure_id is not None}
        )
        if not structures:
            raise DataError(f"evaluation set {name!r} has no labeled structures")
        set_bins = build_similarity_bins(molecules, structures, seed=trn_cfg.seed)
        pairs = sample_uniform_pairs(
            molecules, spectra, set_bins, trn_cfg.eval_pairs,
            stream_rng(trn_cfg.seed, "eval", name),
        )
        eval_pairs[name] = (pairs, eval_by_id)

    log = TrainLog(
        columns=("epoch", "train_mse", "known_mse", "novel_mse", "wall_time_s"),
        meta={
            "mode": "siamese",
            "n_eval_pairs": str(trn_cfg.eval_pairs),
            "pairs_per_epoch": str(trn_cfg.pairs_per_epoch),
            "seed": str(trn_cfg.seed),
        },
    )

    for epoch in range(trn_cfg.epochs):
        started = time.perf_counter()
        pair_rng = stream_rng(trn_cfg.seed, "pairs", epoch)
        dropout_rng = stream_rng(trn_cfg.seed, "dropout", epoch)
        pairs = sample_uniform_pairs(
            molecules, train_spectra, bins, trn_cfg.pairs_per_epoch, pair_rng
        )
        epoch_loss = 0.0
        for start in range(0, len(pairs), trn_cfg.batch_size):
            chunk = pairs[start : start + trn_cfg.batch_size]
            spectra = [by_id[p.a] for p in chunk] + [by_id[p.b] for p in chunk]
            embs = encode_batch(
                spectra, enc_cfg, weights, sin_cfg=sin_cfg, vocab=vocab,
                mode="train", precision=precision, rng=dropout_rng,
            )
            half = len(chunk)
            labels = np.array([p.label for p in chunk], dtype=np.float64)
            loss = siamese_loss(embs[:half], embs[half:], labels)
            apply_step(
                loss, params, adam, trn_cfg.clip,
                where=f"epoch {epoch}, step {start // trn_cfg.batch_size}",
            )
            epoch_loss += float(loss.data) * half
        train_mse = epoch_loss / len(pairs) if pairs else float("nan")

        held = {}
        for name in ("known", "novel"):
            if name in eval_pairs:
                pairs_n, by_id_n = eval_pairs[name]
                held[name] = _pair_mse(
                    pairs_n, by_id_n, enc_cfg, weights, sin_cfg, vocab,
                    precision, trn_cfg.batch_size,
                )
            else:
                held[name] = float("nan")
        log.append(
            epoch, train_mse, held["known"], held["novel"],
            round(time.perf_counter() - started, 3),
        )
    return weights, log
