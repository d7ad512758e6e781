#!/usr/bin/env python3
"""Train the plain network and the filter-fronted one on synthetic glyphs.

The synthetic set stands in for a real digit dataset so the demo runs
offline.  Both models see the identical batch order; only the weight
draws differ.  After training, both are scored on the clean test split
and on two occluded variants of it.
"""

import time
from pathlib import Path

from bordernet import datasets, nn, vision

OUT = Path(__file__).resolve().parent / "out"

EPOCHS = 3
OCCLUSIONS = (
    vision.OcclusionSpec(vision.STRIPES, 3, 3),
    vision.OcclusionSpec(vision.GRID, 2, 4),
)


def main() -> None:
    OUT.mkdir(exist_ok=True)

    train_raw = datasets.synthetic(4000, seed=11)
    test_raw = datasets.synthetic(1000, seed=12)
    train = datasets.normalize(train_raw)

    nets = {}
    for seed, (name, spec) in enumerate((("lenet5", nn.lenet5_spec()),
                                         ("bordernet", nn.bordernet_spec()))):
        start = time.perf_counter()
        net = nn.train(spec, train, epochs=EPOCHS, batch_size=64,
                       seed=seed, shuffle_seed=7)
        took = time.perf_counter() - start
        nets[name] = net
        ckpt = OUT / f"{name}_synth.npz"
        nn.save_checkpoint(net, ckpt)
        print(f"trained {name} ({net.num_parameters()} params) "
              f"in {took:.1f}s -> {ckpt}")

    header = ["condition"] + list(nets)
    rows = [("clean", test_raw)]
    rows += [(f"{o.kind} w={o.w} s={o.s}",
              datasets.LabeledSet(vision.occlude(test_raw.images, o),
                                  test_raw.labels))
             for o in OCCLUSIONS]

    print()
    print(f"{header[0]:<16}" + "".join(f"{h:>12}" for h in header[1:]))
    for label, subset in rows:
        scored = datasets.normalize(subset)
        accs = [nn.evaluate(nets[name], scored) for name in nets]
        print(f"{label:<16}" + "".join(f"{a:>12.4f}" for a in accs))


if __name__ == "__main__":
    main()
