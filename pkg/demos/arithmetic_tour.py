"""Gauss sums have modulus q^(-n/2) at odd primes; zero counts settle along Q_j."""
import numpy as np

from spherelab import gauss_F, zero_count
from spherelab.arithmetic import completed_sum_identity


def main():
    rng = np.random.default_rng(0)
    for q in (3, 7, 31, 97):
        avec = rng.integers(0, q, 5)
        vals = [abs(gauss_F(q, a, avec)) * q ** 2.5 for a in range(1, q)]
        print(f"q={q:>3}  min/max of |F_q(a, avec)| q^(5/2): {min(vals):.12f} {max(vals):.12f}")

    for q in (4, 8, 12):
        worst = max(completed_sum_identity(q, lam, 5) for lam in range(q))
        print(f"completed-sum residual at q={q}: {worst:.1e}")

    for Q in (2, 24, 40320):
        rep = zero_count(Q, 5)
        print(f"Q={Q:>6}  N={rep.count}  Q^(1-n) N = {rep.normalized} "
              f"~ {float(rep.normalized):.6f}  local={rep.local}")


if __name__ == "__main__":
    main()
