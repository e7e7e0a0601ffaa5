"""Independent numpy evaluation of the field model on a 4x4 panel.

Prints values that are frozen into tests/test_field.cpp.
"""
import numpy as np

c0 = 299792458.0
f = 6e9
lam = c0 / f
k = 2 * np.pi / lam
L = 1.5
s = np.array([0.75, 0.75, 0.75])
side = 4
d = 0.25 * lam
beta = 0.7
m_exp, p_exp = 2.0, 1.0

# panel on x = 0; columns along y, rows along z
P = []
for row in range(side):
    for col in range(side):
        P.append([0.0, L / 2 + (col - 1.5) * d, L / 2 + (row - 1.5) * d])
P = np.array(P)
center = np.array([0.0, L / 2, L / 2])
u_tx = (center - s) / np.linalg.norm(center - s)
n_out = np.array([-1.0, 0.0, 0.0])


def direct(n):
    dv = P[n] - s
    r = np.linalg.norm(dv)
    dh = dv / r
    return np.exp(1j * k * r) / r * abs(dh @ u_tx) ** m_exp * max(0.0, dh @ n_out) ** p_exp


walls = {  # normal into the room, mirror of s
    "x_max": (np.array([-1.0, 0, 0]), np.array([2 * L - s[0], s[1], s[2]])),
    "y_min": (np.array([0, 1.0, 0]), np.array([s[0], -s[1], s[2]])),
    "y_max": (np.array([0, -1.0, 0]), np.array([s[0], 2 * L - s[1], s[2]])),
    "z_min": (np.array([0, 0, 1.0]), np.array([s[0], s[1], -s[2]])),
    "z_max": (np.array([0, 0, -1.0]), np.array([s[0], s[1], 2 * L - s[2]])),
}


def secondary(n, wall):
    nw, img = walls[wall]
    dv = P[n] - img
    r = np.linalg.norm(dv)
    return beta * np.exp(1j * k * r) / r * abs(dv / r @ nw) ** p_exp


N = side * side
b = np.array([direct(n) + sum(secondary(n, w) for w in walls) for n in range(N)])
phi = 0.3 * np.arange(N)
gamma = np.exp(1j * phi)
alpha = 0.15
A = np.zeros((N, N), complex)
for n in range(N):
    for m in range(N):
        dr, dc = abs(n // side - m // side), abs(n % side - m % side)
        if n != m and dr <= 1 and dc <= 1:
            r = np.linalg.norm(P[n] - P[m])
            A[n, m] = alpha * gamma[m] * np.exp(1j * k * r) / (k * r)
E_inc = np.linalg.solve(np.eye(N) - A, b)
x = np.array([0.6, 0.9, 0.8])
rr = np.linalg.norm(x - P, axis=1)
E_x = np.sum(gamma * E_inc * np.exp(1j * k * rr) / rr)

fmt = lambda z: f"{{{z.real:.17g}, {z.imag:.17g}}}"
print("direct[5]", fmt(direct(5)))
print("direct[10]", fmt(direct(10)))
print("secondary x_max[5]", fmt(secondary(5, "x_max")))
print("secondary z_min[12]", fmt(secondary(12, "z_min")))
print("b[0]", fmt(b[0]))
print("E_inc[5]", fmt(E_inc[5]))
print("E_inc[15]", fmt(E_inc[15]))
print("E(x)", fmt(E_x))
