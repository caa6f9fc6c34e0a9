"""Minimum energy of a constrained qubit, three ways.

We ask: what is the lowest <H> for H = Z over single-qubit states that
satisfy <X> = 0.6?  Geometry gives the exact answer on the Bloch ball:
min z subject to x = 0.6, x^2 + z^2 <= 1, i.e. -0.8.  The solver gets
there by maximizing the dual objective f(mu) = mu q - T ln Z_T(mu) over
the chemical potential mu at a low temperature.
"""

import numpy as np

from thermosdp import EnergyProblem, PauliSum, gradient_ascent, schedule_gd
from thermosdp.oracle import bloch_energy_problem, dual_scan

problem = EnergyProblem(
    PauliSum(1, [("Z", 1.0)]),      # Hamiltonian
    [PauliSum(1, [("X", 1.0)])],    # one conserved charge
    [0.6],                          # its target expectation
)

epsilon, radius = 0.05, 2.0
sched = schedule_gd(problem, epsilon, radius)
print("schedule: T = %.6f, L = %.3f, eta = %.5f, M = %d"
      % (sched.temperature, sched.smoothness, sched.step_size, sched.iterations))

report = gradient_ascent(problem, epsilon, radius)
exact = bloch_energy_problem(problem)
print("estimate  = %.6f" % report.estimate)
print("exact     = %.6f  (Bloch-ball geometry)" % exact)
print("gap       = %.2e  (guarantee: <= %.2f)" % (abs(report.estimate - exact), epsilon))
print("mu_final  = %.6f" % report.mu_final[0])

# the dual trace is monotone: every exact ascent step improves f
trace = np.asarray(report.objective_trace)
print("dual objective increased monotonically:", bool(np.all(np.diff(trace) >= -1e-12)))

# a scan oracle certifies where the dual optimum actually sits
mu_star, f_star = dual_scan(problem, sched.temperature, np.linspace(-3, 3, 61))
print("scan: mu* = %.6f, f* = %.6f, ||mu*|| <= r: %s"
      % (mu_star[0], f_star, abs(mu_star[0]) <= radius))
