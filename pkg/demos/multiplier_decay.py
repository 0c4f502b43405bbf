"""Major-arc decomposition residuals and the decay of the approximation error."""
from spherelab import decay_fit, decomposition_check
from spherelab.multipliers import decay_grid


def main():
    for l, j in [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)]:
        rep = decomposition_check(l, j, 200, seed=1)
        print(f"l={l} j={j}: {len(rep.samples)} frequencies, max residual {rep.max_residual:.1e}")

    grid = decay_grid(500)
    fit = decay_fit([24, 120, 720, 5040, 40320], grid)
    for (lam, res), h in zip(fit.pairs, fit.window_h):
        print(f"lambda={lam:>6}  H={h}  sup residual {res:.4f}")
    print(f"fitted decay exponent: {fit.fitted_delta:.3f} ({fit.normalization} normalization)")


if __name__ == "__main__":
    main()
