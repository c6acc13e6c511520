import math

import numpy as np

from emaclab.quadrature import DEFAULT_RULE


def test_monomial_exactness_to_declared_degree():
    # reference-triangle integral of x^i y^j is i! j! / (i+j+2)!
    lam = DEFAULT_RULE.points
    x, y = lam[:, 1], lam[:, 2]
    for i in range(DEFAULT_RULE.degree + 1):
        for j in range(DEFAULT_RULE.degree + 1 - i):
            exact = math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)
            got = float(np.sum(DEFAULT_RULE.weights * x**i * y**j))
            assert abs(got - exact) <= 1e-14, (i, j)


def test_weights_and_points():
    assert abs(DEFAULT_RULE.weights.sum() - 0.5) <= 1e-15
    assert np.all(DEFAULT_RULE.weights > 0)
    lam = DEFAULT_RULE.points
    assert np.allclose(lam.sum(axis=1), 1.0, atol=1e-15)
    assert np.all(lam > 0)
