"""The streaming engine: an independent pooler + sequence memory per cell.

Each frame cell runs its own pipeline so activity in one part of the frame
can never change what counts as normal elsewhere.  Per cell and frame:

1. encode the cell windows (one SDR per class) and concatenate them,
2. spatial pooling,
3. push the pooled output into a short history ring and feed the
   concatenated history to the sequence memory, so "moving" and "standing
   still" produce different inputs,
4. optionally zero the reported score on the frame a cell turns from
   empty to occupied, which is unpredictable by construction.

Cells are independent within a frame and may execute in parallel; results
are assembled by coordinate, so parallel runs are bit-identical to
sequential ones.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .aggregation import AggregationKind, aggregate
from .encoder import CellInput, EncoderConfig, encode_frame
from .errors import ConfigError
from .sdr import Sdr, concatenate
from .spatial_pooler import SpParams, SpatialPooler
from .temporal_memory import TmParams, TemporalMemory
from . import snapshot

__all__ = [
    "CellOverride",
    "GridConfig",
    "FrameResult",
    "GridModel",
    "build_grid_config",
    "derive_cell_seeds",
]

SNAPSHOT_KIND = "grid-model"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class CellOverride:
    """Optional per-cell replacement parameters; seeds are used verbatim."""

    sp: SpParams | None = None
    tm: TmParams | None = None


@dataclass(frozen=True)
class GridConfig:
    encoder: EncoderConfig
    default_sp: SpParams
    default_tm: TmParams
    multistep_n: int = 2
    suppression_enabled: bool = True
    per_cell_overrides: dict = field(default_factory=dict)
    seed: int = 0
    aggregation: AggregationKind = AggregationKind.MEAN
    smoothing_window: int = 200

    def problems(self) -> list[str]:
        out = list(self.encoder.problems())
        if self.multistep_n < 1:
            out.append(f"multistep_n must be >= 1, got {self.multistep_n}")
        if self.smoothing_window < 1:
            out.append(f"smoothing_window must be >= 1, got {self.smoothing_window}")
        expected_input = self.encoder.cell_bits * self.encoder.class_count
        if self.default_sp.input_width != expected_input:
            out.append(
                f"sp input_width {self.default_sp.input_width} != cell bits x "
                f"classes ({expected_input})"
            )
        out.extend(self.default_sp.problems())
        expected_tm_cols = self.default_sp.column_count * self.multistep_n
        if self.default_tm.column_count != expected_tm_cols:
            out.append(
                f"tm column_count {self.default_tm.column_count} != sp columns x "
                f"multistep_n ({expected_tm_cols})"
            )
        out.extend(self.default_tm.problems())
        grows, gcols = self.encoder.grid_shape
        for coord, override in self.per_cell_overrides.items():
            r, c = coord
            if not (0 <= r < grows and 0 <= c < gcols):
                out.append(f"override coordinate {coord} outside grid {grows}x{gcols}")
                continue
            sp = override.sp if override.sp is not None else self.default_sp
            tm = override.tm if override.tm is not None else self.default_tm
            if sp.input_width != expected_input:
                out.append(
                    f"override {coord}: sp input_width {sp.input_width} != "
                    f"{expected_input}"
                )
            if tm.column_count != sp.column_count * self.multistep_n:
                out.append(
                    f"override {coord}: tm column_count {tm.column_count} != "
                    f"sp columns x multistep_n ({sp.column_count * self.multistep_n})"
                )
            out.extend(sp.problems())
            out.extend(tm.problems())
        return out

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise ConfigError("; ".join(problems))


@dataclass(frozen=True)
class FrameResult:
    """Per-frame output record.

    ``certainty`` holds the per-cell count of predicted columns; fewer
    predictions means the cell is more certain about what comes next.
    """

    frame_index: int
    raw_scores: np.ndarray
    reported_scores: np.ndarray
    certainty: np.ndarray
    aggregate: float
    aggregate_smoothed: float


class CellUnit:
    __slots__ = ("sp", "tm", "history", "prev_empty", "last_tm_input")

    def __init__(self, sp: SpatialPooler, tm: TemporalMemory, multistep_n: int,
                 class_count: int):
        self.sp = sp
        self.tm = tm
        width = sp.params.column_count
        self.history: list[Sdr] = [Sdr(width) for _ in range(multistep_n)]
        self.prev_empty = [False] * class_count
        self.last_tm_input: Sdr | None = None

    def step(self, cell_input: CellInput, learn: bool) -> tuple[float, int, bool]:
        sp_out = self.sp.compute(concatenate(cell_input.per_class), learn)
        self.history.pop(0)
        self.history.append(sp_out)
        tm_in = concatenate(self.history)
        self.last_tm_input = tm_in
        result = self.tm.compute(tm_in, learn)
        entered = any(
            prev and not cur
            for prev, cur in zip(self.prev_empty, cell_input.was_empty)
        )
        self.prev_empty = list(cell_input.was_empty)
        return result.anomaly_score, result.predictive_column_count, entered


def derive_cell_seeds(grid_seed: int, coord: tuple[int, int]) -> tuple[int, int]:
    """Deterministic (sp_seed, tm_seed) for one cell of the grid."""
    sp_seed = np.random.SeedSequence([grid_seed, coord[0], coord[1], 0])
    tm_seed = np.random.SeedSequence([grid_seed, coord[0], coord[1], 1])
    return int(sp_seed.generate_state(1)[0]), int(tm_seed.generate_state(1)[0])


def _derived_params(config: GridConfig, coord: tuple[int, int]) -> tuple[SpParams, TmParams]:
    override = config.per_cell_overrides.get(coord)
    sp_seed, tm_seed = derive_cell_seeds(config.seed, coord)
    if override is not None and override.sp is not None:
        sp = override.sp
    else:
        sp = replace(config.default_sp, seed=sp_seed)
    if override is not None and override.tm is not None:
        tm = override.tm
    else:
        tm = replace(config.default_tm, seed=tm_seed)
    return sp, tm


class GridModel:
    """Stateful frame-by-frame anomaly detector over a cell grid."""

    def __init__(self, config: GridConfig):
        config.validate()
        self.config = config
        grows, gcols = config.encoder.grid_shape
        self.grid_shape = (grows, gcols)
        self.units: list[list[CellUnit]] = []
        for r in range(grows):
            row = []
            for c in range(gcols):
                sp_params, tm_params = _derived_params(config, (r, c))
                row.append(
                    CellUnit(
                        SpatialPooler(sp_params),
                        TemporalMemory(tm_params),
                        config.multistep_n,
                        config.encoder.class_count,
                    )
                )
            self.units.append(row)
        self.frame_counter = 0
        self._agg_history: deque[float] = deque(maxlen=config.smoothing_window)

    def unit(self, r: int, c: int) -> CellUnit:
        return self.units[r][c]

    def step(self, planes, learn: bool = True, workers: int = 1) -> FrameResult:
        """Process one frame.  ``workers`` > 1 runs cells on a thread pool."""
        encoded = encode_frame(self.config.encoder, planes)
        grows, gcols = self.grid_shape
        flat = [
            (self.units[r][c], encoded[r][c])
            for r in range(grows)
            for c in range(gcols)
        ]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outputs = list(
                    pool.map(lambda pair: pair[0].step(pair[1], learn), flat)
                )
        else:
            outputs = [unit.step(cell_input, learn) for unit, cell_input in flat]

        raw = np.zeros(self.grid_shape, dtype=np.float64)
        certainty = np.zeros(self.grid_shape, dtype=np.int64)
        reported = np.zeros(self.grid_shape, dtype=np.float64)
        for (r, c), (score, predictions, entered) in zip(
            ((r, c) for r in range(grows) for c in range(gcols)), outputs
        ):
            raw[r, c] = score
            certainty[r, c] = predictions
            if self.config.suppression_enabled and entered:
                reported[r, c] = 0.0
            else:
                reported[r, c] = score

        agg = aggregate(self.config.aggregation, reported.reshape(-1))
        self._agg_history.append(agg)
        smoothed = float(np.mean(np.asarray(self._agg_history, dtype=np.float64)))
        result = FrameResult(
            frame_index=self.frame_counter,
            raw_scores=raw,
            reported_scores=reported,
            certainty=certainty,
            aggregate=agg,
            aggregate_smoothed=smoothed,
        )
        self.frame_counter += 1
        return result

    def run(self, frames, learn: bool = True, workers: int = 1) -> list[FrameResult]:
        return [self.step(planes, learn=learn, workers=workers) for planes in frames]

    # --- serialization ----------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "config": self.config,
            "frame_counter": self.frame_counter,
            "agg_history": list(self._agg_history),
            "units": [
                [
                    {
                        "sp": unit.sp.state_dict(),
                        "tm": unit.tm.state_dict(),
                        "history": [sdr.active for sdr in unit.history],
                        "prev_empty": list(unit.prev_empty),
                    }
                    for unit in row
                ]
                for row in self.units
            ],
        }

    def load_state_dict(self, state: dict) -> None:
        config: GridConfig = state["config"]
        self.config = config
        self.grid_shape = config.encoder.grid_shape
        self.frame_counter = int(state["frame_counter"])
        self._agg_history = deque(
            [float(v) for v in state["agg_history"]], maxlen=config.smoothing_window
        )
        self.units = []
        for r, row_state in enumerate(state["units"]):
            row = []
            for c, unit_state in enumerate(row_state):
                sp = SpatialPooler.__new__(SpatialPooler)
                sp.load_state_dict(unit_state["sp"])
                tm = TemporalMemory.__new__(TemporalMemory)
                tm.load_state_dict(unit_state["tm"])
                unit = CellUnit.__new__(CellUnit)
                unit.sp = sp
                unit.tm = tm
                width = sp.params.column_count
                unit.history = [
                    Sdr(width, active) for active in unit_state["history"]
                ]
                unit.prev_empty = list(unit_state["prev_empty"])
                unit.last_tm_input = None
                row.append(unit)
            self.units.append(row)

    def to_bytes(self) -> bytes:
        return snapshot.pack(SNAPSHOT_KIND, SNAPSHOT_VERSION, self.state_dict())

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridModel":
        state = snapshot.unpack(data, SNAPSHOT_KIND, SNAPSHOT_VERSION)
        model = cls.__new__(cls)
        model.load_state_dict(state)
        return model

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "GridModel":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def build_grid_config(
    frame_size,
    cell_size=(12, 12),
    class_count: int = 1,
    *,
    multistep_n: int = 2,
    seed: int = 0,
    suppression_enabled: bool = True,
    aggregation: AggregationKind = AggregationKind.MEAN,
    smoothing_window: int = 200,
    min_sparsity: int = 5,
    empty_pattern_sparsity: int = 5,
    sp_columns: int = 128,
    sp_active: int = 8,
    sp_kwargs: dict | None = None,
    tm_kwargs: dict | None = None,
    per_cell_overrides: dict | None = None,
) -> GridConfig:
    """Wire a consistent configuration from the frame geometry outward."""
    encoder = EncoderConfig(
        frame_size=tuple(frame_size),
        cell_size=tuple(cell_size),
        class_count=class_count,
        min_sparsity=min_sparsity,
        empty_pattern_sparsity=empty_pattern_sparsity,
        seed=seed,
    )
    sp = SpParams(
        input_width=encoder.cell_bits * class_count,
        column_count=sp_columns,
        active_columns=sp_active,
        **(sp_kwargs or {}),
    )
    tm = TmParams(column_count=sp_columns * multistep_n, **(tm_kwargs or {}))
    return GridConfig(
        encoder=encoder,
        default_sp=sp,
        default_tm=tm,
        multistep_n=multistep_n,
        suppression_enabled=suppression_enabled,
        per_cell_overrides=dict(per_cell_overrides or {}),
        seed=seed,
        aggregation=aggregation,
        smoothing_window=smoothing_window,
    )
