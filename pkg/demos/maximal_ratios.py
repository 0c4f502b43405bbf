"""Empirical l^p ratios of the maximal operator along three sequences."""
import math

from spherelab import TestFamilySpec, op_norm_estimate


def main():
    family = TestFamilySpec.parse("random:2:0.01")
    sequences = {
        "factorial (2^l)!": [2, 24, 40320],
        "factorial l!": [2, 6, 24, 120, 720],
        "lacunary 2^l": [2, 4, 8, 16, 32, 64],
    }
    for p in (1.1, 2.0, math.inf):
        for name, lams in sequences.items():
            rep = op_norm_estimate(p, lams, family, count=4, seed=1)
            print(f"p={p:<4} {name:<17} max ratio {rep.max_ratio:.4f} "
                  f"(ceiling {len(rep.sequence)}, skipped {rep.dropped})")


if __name__ == "__main__":
    main()
