"""Taylor coefficients of the two-rebit nu-jacobian about nu = 1.

The closed form has a removable ninth-order pole at nu = 1; the library switches to this
expansion in (nu - 1) close to the pole. Prints the exact rational coefficients that are
embedded in src/special.cpp.
"""
import sympy as sp

x = sp.symbols("x")
nu = 1 + x
expr = nu ** sp.Rational(3, 2) * (
    12 * (nu * (nu + 2) * (nu**2 + 14 * nu + 8) + 1) * sp.log(nu) / 2
    - 5 * (5 * nu**4 + 32 * nu**3 - 32 * nu - 5)
) / (3780 * x**9)

order = 10
series = sp.series(expr, x, 0, order).removeO()
for k, c in enumerate(sp.Poly(series, x).all_coeffs()[::-1]):
    c = sp.Rational(c)
    print(f"{k}: {c.p}/{c.q}")
