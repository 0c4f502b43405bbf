"""Lattice points on spheres in Z^5 along the factorial radii 2, 24, 40320."""
import math

from spherelab import count_representations, enumerate_sphere, lambda_value
from spherelab.multipliers import sphere_volume_factor


def main():
    print(f"{'lambda':>8} {'r(lambda)':>12} {'r / lambda^(3/2)':>18}")
    for l in range(1, 4):
        lam = lambda_value(l)
        r = count_representations(lam, 5)
        print(f"{lam:>8} {r:>12} {r / lam ** 1.5:>18.4f}")
    print(f"surface constant for n=5: {sphere_volume_factor(5):.4f}")

    pts = enumerate_sphere(24, 5).points
    norms = (pts ** 2).sum(axis=1)
    print(f"{len(pts)} points with |x|^2 = 24, all on the sphere: {bool((norms == 24).all())}")
    print("first few:", pts[:4].tolist())
    print("largest coordinate:", int(abs(pts).max()), "=", math.isqrt(24))


if __name__ == "__main__":
    main()
