"""Two-dimensional spectra on a product grid.

For a separable pair of processes the 2-D solutions factor into 1-D ones.
A density with a cross term shows the general case.
"""
import numpy as np

from specbound import AngularGrid, EstimatorProblem, ProcessModel, solve_dual
from specbound.multivariate import (
    MultiBasis,
    MultiGrid,
    MultiGridDensity,
    multi_compute_moments,
    multi_entropy,
    multi_solve_dual,
    multi_solve_maxent,
    multi_true_moments,
    tensor_basis,
)

grid = MultiGrid((128, 128))
models = (ProcessModel.ar1(0.5), ProcessModel.ar1(-0.3))
basis = tensor_basis(1, 1)
r = multi_true_moments(models, basis)
print("basis exponents:", basis.exponents, "\nmoments:", np.round(r, 6))

est = multi_solve_dual(r, None, basis, grid).on_grid(grid)
g1 = AngularGrid(128)
u = [solve_dual(EstimatorProblem(m.lags(1), grid=g1)).on_grid(g1).values for m in models]
print("sup |2-D estimate - outer(1-D, 1-D)|:", np.max(np.abs(est.values - np.outer(*u))))

# %% A non-separable density: coupling through cos(theta1 - theta2), seen by the (1, 1) moment.
basis = MultiBasis([(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)])
truth = MultiGridDensity.from_function(lambda a, b: np.exp(0.5 * np.cos(a - b)), grid)
r = multi_compute_moments(truth, basis)
est = multi_solve_dual(r, None, basis, grid).on_grid(grid)
me = multi_solve_maxent(r, basis, grid).on_grid(grid)
print("\nmoment residuals:", np.max(np.abs(multi_compute_moments(est, basis) - r)),
      np.max(np.abs(multi_compute_moments(me, basis) - r)))
print(f"H[estimate] {multi_entropy(est):.5f} <= H[maxent] {multi_entropy(me):.5f}")
