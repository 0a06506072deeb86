"""
Factoring a saddle-point matrix
===============================

Newton steps solve systems of the form [[H, J], [J^T, 0]], which are
symmetric but indefinite. A diagonal-pivoting LDL^T factorization handles
them and reports the inertia as a by-product.
"""

import numpy as np

from pdalm import factor_symmetric_indefinite, solve_factored

H = np.array([[1.0, 0.0], [0.0, 1.0]])
J = np.array([[1.0], [1.0]])
K = np.block([[H, J], [J.T, np.zeros((1, 1))]])

fact = factor_symmetric_indefinite(K)
print("pivot sizes:", fact.pivot_sizes)
print("inertia (positive, negative, zero):", fact.inertia)

y = solve_factored(fact, np.array([0.0, 0.0, 1.0]))
print("solution:", y)

###############################################################################
# A rank-deficient matrix is flagged instead of producing garbage.

print("singular:", factor_symmetric_indefinite(np.outer([1.0, 2.0], [1.0, 2.0])).singular)
