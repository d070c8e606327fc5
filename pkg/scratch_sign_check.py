"""Development cross-check: S1 elements against the closed-form sideband
amplitudes lambda_{+/-}(t), elementwise, for the two-level model.

Expected (key +1, i.e. the e^{-i w_p t} component, amp real = g):
  <e,n+1| S1 |g,n>  = +g sqrt(n+1) / (w+ - wp)     [lambda_+ key +1]
  <g,n+1| S1 |e,n>  = -g sqrt(n+1) / (w- + wp)     [-lambda_- key +1]
  <e,n-1...| ... sigma^+ a: <e,n| S1 |g,n+1> = +g sqrt(n+1) / (w- - wp)
  <g,n| S1 |e,n+1>  = -g sqrt(n+1) / (w+ + wp)     [-lambda_+^* ... key +1?]

and key -1 counterparts with wp -> -wp and g -> conj(g).
"""
import numpy as np

from tdswt import build_rabi, RabiParams, solve_generator, generator_ode_residual

TWO_PI = 2 * np.pi
p = RabiParams(omega_q=TWO_PI * 5.0, omega_a=TWO_PI * 3.0,
               g_p=TWO_PI * 0.04, omega_p=TWO_PI * 2.2, n_a=6)
m = build_rabi(p)
s1 = solve_generator(m.h0, m.interaction)

sp = m.space
g = p.g_p
wm, wp_, op = p.omega_minus, p.omega_plus, p.omega_p

def el(key, bra, ket):
    return s1.terms[key].matrix[sp.index_of(bra), sp.index_of(ket)]

print("ODE residual:", generator_ode_residual(m.h0, s1, m.interaction))
print("anti-hermitian series:", s1.is_antihermitian_series())

ok = True
for n in range(0, 4):
    r = np.sqrt(n + 1)
    checks = [
        ("sigma+ a+ (e,n+1)<-(g,n) key +1", el((1,), (1, n + 1), (0, n)), +g * r / (wp_ - op)),
        ("sigma+ a+ key -1", el((-1,), (1, n + 1), (0, n)), +g * r / (wp_ + op)),
        ("sigma- a+ (g,n+1)<-(e,n) key +1", el((1,), (0, n + 1), (1, n)), -g * r / (wm + op)),
        ("sigma- a+ key -1", el((-1,), (0, n + 1), (1, n)), -g * r / (wm - op)),
        ("sigma+ a  (e,n)<-(g,n+1) key +1", el((1,), (1, n), (0, n + 1)), +g * r / (wm - op)),
        ("sigma+ a  key -1", el((-1,), (1, n), (0, n + 1)), +g * r / (wm + op)),
        ("sigma- a  (g,n)<-(e,n+1) key +1", el((1,), (0, n), (1, n + 1)), -g * r / (wp_ + op)),
        ("sigma- a  key -1", el((-1,), (0, n), (1, n + 1)), -g * r / (wp_ - op)),
    ]
    for name, got, want in checks:
        good = abs(got - want) <= 1e-12 * abs(want)
        ok &= good
        if n == 0:
            print(f"  {name}: got {got:.6g} want {want:.6g} {'OK' if good else 'MISMATCH'}")
print("ALL ELEMENT CHECKS:", "PASS" if ok else "FAIL")
