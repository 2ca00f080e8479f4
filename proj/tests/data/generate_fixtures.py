"""Regenerates baseline.csv / drifted.csv. Deterministic for a fixed seed.

x        N(0, 1) in the baseline, N(3, 1) in the drifted batch (3 sigma shift)
amount   N(100, 15); missing rate 2% baseline, 12% drifted
segment  categorical a/b/c with weights .5/.3/.2 on both sides
"""
import csv
import random

ROWS = 1000


def write(path, rng, x_shift, amount_missing):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["x", "amount", "segment"])
        for _ in range(ROWS):
            x = rng.gauss(0.0, 1.0) + x_shift
            amount = "" if rng.random() < amount_missing else f"{rng.gauss(100.0, 15.0):.2f}"
            segment = rng.choices(["a", "b", "c"], weights=[5, 3, 2])[0]
            w.writerow([f"{x:.6f}", amount, segment])


if __name__ == "__main__":
    write("baseline.csv", random.Random(20231101), 0.0, 0.02)
    write("drifted.csv", random.Random(20231102), 3.0, 0.12)
