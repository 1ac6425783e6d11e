"""Exact rational evaluation of the paper-toroidal preset initial quantities.

Independent of the Rust code: plain fractions, no floating point until print.
Run: python3 tools/spot_values.py
"""
from fractions import Fraction as F

x0 = (F(1, 3), F(1, 4), F(1, 2))
v0 = (F(2, 5), F(2, 3), F(1))
a0, a1, a2, c = F(0), F(1), F(1), F(1, 10)

r2 = x0[0] ** 2 + x0[1] ** 2
r = F(5, 12)
assert r * r == r2
z = x0[2]
e_par = (-x0[1] / r, x0[0] / r, F(0))
b = a0 + a1 * r + a2 * z * z
db_dr, db_dz = a1, 2 * a2 * z
E_r, E_z = c * z, c * r

vpar = sum(e * v for e, v in zip(e_par, v0))
# |v x e_par|^2 = |v|^2 - vpar^2; mu0 = |v x B|^2 / (2|B|^3) = eps |v_perp|^2 / (2 b)
vperp2 = sum(v * v for v in v0) - vpar ** 2
mu0_over_eps = vperp2 / (2 * b)

mu = F(11388, 10 ** 7)  # coefficient used in the drift right-hand-side example
v = vpar
rhs = (
    (-E_z + mu * db_dz) / b,
    (v * v / r + E_r - mu * db_dr) / b,
    (v / r) * (E_z - mu * db_dz) / b,
)

print("r0        ", r, float(r))
print("vpar0     ", vpar, float(vpar))
print("mu0/eps   ", mu0_over_eps, float(mu0_over_eps))
print("b0        ", b)
for name, q in zip(("dr/dtau", "dz/dtau", "dv/dtau"), rhs):
    print(f"{name:10}", q, repr(float(q)))
