import numpy as np


def central_difference(fun, x, *args, h: float = 1.0e-6) -> np.ndarray:
    """
    Central-difference approximation of the gradient (or Jacobian) of ``fun``.

    :param fun: callable taking a parameter vector and ``args``; may return a
        scalar or a vector.

    :param x: point at which to differentiate.

    :param h: step, scaled by max(1, |x_i|) in each direction.

    :return: array of shape x.shape for scalar functions, otherwise
        (len(fun(x)), len(x)).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    columns = []
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        f_plus = np.asarray(fun(x + e, *args), dtype=float)
        f_minus = np.asarray(fun(x - e, *args), dtype=float)
        columns.append(0.5 * (f_plus - f_minus) / step)
    jac = np.stack(columns, axis=-1)
    return jac if jac.ndim > 1 else jac.reshape(x.shape)
