"""Link-existence rates per common-neighborhood class and the diversity signature."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from statistics import NormalDist

import numpy as np

from .canon import build_catalog
from .census import CensusTable
from .exceptions import UndefinedBaselineError

CSV_COLUMNS = ["class_id", "k", "pair_count", "linked_count", "rate", "ci_low", "ci_high",
               "relative_rate", "defined"]


def wilson_interval(successes, trials, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("Wilson interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    z2 = z * z
    denom = trials + z2
    center = (successes + z2 / 2.0) / denom
    half = z / denom * math.sqrt(successes * (trials - successes) / trials + z2 / 4.0)
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


@dataclass
class RateEntry:
    class_id: int
    k: int
    pair_count: int
    linked_count: int
    rate: float
    ci_low: float
    ci_high: float
    relative_rate: float
    rel_ci_low: float
    rel_ci_high: float
    defined: bool


@dataclass
class SignatureVector:
    size_range: tuple[int, int]
    entries: list[RateEntry]
    base_rate: float
    base_ci: tuple[float, float]

    def __len__(self):
        return len(self.entries)

    @property
    def class_ids(self) -> list[int]:
        return [e.class_id for e in self.entries]

    @property
    def relative_rates(self) -> np.ndarray:
        """Relative rates with NaN for classes that were never observed."""
        return np.array([e.relative_rate if e.defined else np.nan for e in self.entries])

    @property
    def defined_mask(self) -> np.ndarray:
        return np.array([e.defined for e in self.entries], dtype=bool)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for e in self.entries:
                writer.writerow([e.class_id, e.k, e.pair_count, e.linked_count,
                                 _fmt(e.rate), _fmt(e.ci_low), _fmt(e.ci_high),
                                 _fmt(e.relative_rate), int(e.defined)])

    def to_json(self, path, extra_meta=None):
        doc = {
            "size_range": list(self.size_range),
            "base_rate": self.base_rate,
            "base_ci": list(self.base_ci),
            "entries": [_json_safe(asdict(e)) for e in self.entries],
        }
        if extra_meta:
            doc.update(extra_meta)
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")

    @classmethod
    def from_json(cls, path):
        doc = json.loads(Path(path).read_text())
        entries = [RateEntry(**{k: (np.nan if v is None else v) for k, v in e.items()})
                   for e in doc["entries"]]
        return cls(tuple(doc["size_range"]), entries, doc["base_rate"], tuple(doc["base_ci"]))


def _fmt(x):
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def _json_safe(d):
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in d.items()}


def read_signature_csv(path):
    """Relative rates (NaN where undefined) and class ids from a signature CSV."""
    ids, values = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ids.append(int(row["class_id"]))
            ok = row["defined"] in ("1", "True", "true")
            values.append(float(row["relative_rate"]) if ok else np.nan)
    return ids, np.array(values)


def build_signature(census: CensusTable, k_min: int = 2, k_max: int = 4,
                    confidence: float = 0.95) -> SignatureVector:
    """Relative link-existence rates for every class with ``k_min <= k <= k_max``.

    Rates are normalised by the linked fraction among pairs with exactly one
    common neighbor. The relative-rate interval is the ratio of the class and
    baseline Wilson intervals (low / base_high, high / base_low).
    """
    if not 1 <= k_min <= k_max:
        raise ValueError(f"invalid size range ({k_min}, {k_max})")
    if census.max_k < k_max:
        raise ValueError(f"census covers sizes up to {census.max_k}, need {k_max}")
    catalog = build_catalog(census.max_k)
    base_pairs = int(census.pair_count[0])
    if base_pairs == 0:
        raise UndefinedBaselineError("no pairs with exactly one common neighbor")
    base_linked = int(census.linked_count[0])
    if base_linked == 0:
        raise UndefinedBaselineError("no linked pairs with exactly one common neighbor")
    base_rate = base_linked / base_pairs
    base_lo, base_hi = wilson_interval(base_linked, base_pairs, confidence)

    entries = []
    for cid in catalog.ids_in_range(k_min, k_max):
        pairs = int(census.pair_count[cid])
        linked = int(census.linked_count[cid])
        if pairs == 0:
            entries.append(RateEntry(cid, catalog[cid].k, 0, 0, np.nan, np.nan, np.nan,
                                     np.nan, np.nan, np.nan, False))
            continue
        rate = linked / pairs
        lo, hi = wilson_interval(linked, pairs, confidence)
        rel_hi = hi / base_lo if base_lo > 0 else math.inf
        entries.append(RateEntry(cid, catalog[cid].k, pairs, linked, rate, lo, hi,
                                 rate / base_rate, lo / base_hi, rel_hi, True))
    return SignatureVector((k_min, k_max), entries, base_rate, (base_lo, base_hi))
