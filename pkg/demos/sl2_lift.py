# %% [markdown]
# The lifted group law on the universal cover of SL(2,R)
#
# Points are (x, y, theta) with (x, y) in the upper half-plane and theta an
# unwrapped angle. The third coordinate of a product is the continuous lift
# mu3_lift; modulo 2 pi it agrees with the 2x2 matrix product.

# %%
import numpy as np

from thurston_flows.groups import TWO_PI, act, compose, inverse, mu3_lift, phi_chart, phi_chart_inverse

rng = np.random.default_rng(42)

# %%
taus = np.linspace(-4 * np.pi, 4 * np.pi, 9)
print("tau        mu3(tau, 0.5, 0.8, 0)")
for t in taus:
    print(f"{t:+8.4f}   {mu3_lift(t, 0.5, 0.8, 0.0):+.6f}")

# %% [markdown]
# Translating tau by 2 pi shifts the lifted angle by 2 pi: the centre of the cover.

# %%
print(mu3_lift(1.0 + TWO_PI, 0.3, 1.7, 0.2) - mu3_lift(1.0, 0.3, 1.7, 0.2) - TWO_PI)

# %% [markdown]
# Compare with the matrix product, then check associativity and inverses.

# %%
worst = 0.0
for _ in range(2000):
    g = (rng.uniform(-2, 2), np.exp(rng.uniform(-1, 1)), rng.uniform(-10, 10))
    p = (rng.uniform(-2, 2), np.exp(rng.uniform(-1, 1)), rng.uniform(-10, 10))
    _, _, T = phi_chart(phi_chart_inverse(*g) @ phi_chart_inverse(*p))
    d = (act("sl2tilde", g, p)[2] - T + np.pi) % TWO_PI - np.pi
    worst = max(worst, abs(d))
print(f"projection mismatch (mod 2 pi): {worst:.1e}")

g, h, p = (0.3, 1.4, 5.0), (-1.0, 0.6, -9.0), (0.2, 2.0, 1.0)
print(act("sl2tilde", compose("sl2tilde", g, h), p) - act("sl2tilde", g, act("sl2tilde", h, p)))
print(compose("sl2tilde", inverse("sl2tilde", g), g).params)
