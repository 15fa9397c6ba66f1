"""Frozen-frame experiment: does the engine notice when time stops?

Warms the model on a cyclic traffic loop, then branches into a frozen
stream (one frame repeated) and a control stream, and prints the per-cell
score maxima inside the frozen object's cells for both branches, for a
chosen multistep depth.

Usage:
    python scripts/freeze_experiment.py [--multistep 2] [--cycles 50]
"""

import argparse

from htmgrid import (
    AggregationKind,
    FrameRepeat,
    GridModel,
    LinearLoop,
    ObjectTrack,
    Scenario,
    build_grid_config,
    generate,
    object_position,
)

FRAME = (36, 36)
OBJECT = ObjectTrack(shape=(6, 6), path=LinearLoop(start=(15, 0), velocity=(0, 3)))
PERIOD = FRAME[1] - 6 + 1


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--multistep", type=int, default=2)
    parser.add_argument("--cycles", type=int, default=50)
    parser.add_argument("--freeze-frames", type=int, default=20)
    args = parser.parse_args()

    warm = PERIOD * args.cycles
    total = warm + args.freeze_frames + 100
    plain = Scenario(frame_size=FRAME, frame_count=total, objects=(OBJECT,), seed=11)
    frozen = Scenario(
        frame_size=FRAME, frame_count=total, objects=(OBJECT,), seed=11,
        events=(FrameRepeat(at=warm, duration=args.freeze_frames),),
    )
    config = build_grid_config(
        FRAME, (12, 12), seed=3, multistep_n=args.multistep,
        aggregation=AggregationKind.NONZERO_MEAN,
    )
    plain_frames = generate(plain)
    model = GridModel(config)
    print(f"warming {warm} frames ({args.cycles} cycles, multistep={args.multistep})")
    for planes in plain_frames[:warm]:
        model.step(planes)
    snapshot = model.to_bytes()

    pos = object_position(OBJECT, warm, FRAME)
    cells = sorted(
        {(r // 12, c // 12)
         for r in range(pos[0], pos[0] + 6)
         for c in range(pos[1], pos[1] + 6)}
    )
    print(f"object frozen at {pos}, watching cells {cells}")

    for label, frames in [("frozen", generate(frozen)), ("control", plain_frames)]:
        branch = GridModel.from_bytes(snapshot)
        peak = 0.0
        for planes in frames[warm : warm + args.freeze_frames]:
            result = branch.step(planes)
            peak = max(peak, max(result.reported_scores[rc] for rc in cells))
        print(f"{label:>8}: max cell score in window = {peak:.3f}")


if __name__ == "__main__":
    main()
