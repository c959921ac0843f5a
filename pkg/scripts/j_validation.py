"""Closed-form damped moments against quadrature, and the contraction constant display
against the value implied by summing its defining series."""

from __future__ import annotations

import math

from capasym.asymptotics import (
    J1_closed,
    J1_quadrature,
    J2_closed,
    J2_quadrature,
    LiouvilleFrame,
    contraction_bound,
    min_contraction_alpha,
    sigma,
)


def j_grid() -> None:
    worst = 0.0
    for eps in (0.1, 0.8):
        frame = LiouvilleFrame(eps)
        for T in (0.0, 6.855):
            local = 0.0
            for m in range(1, 7):
                for j in range(m + 2):
                    k = m + 1 - j
                    for closed, quad in ((J1_closed, J1_quadrature), (J2_closed, J2_quadrature)):
                        q, _ = quad(j, k, m, frame, T)
                        local = max(local, abs(closed(j, k, m, frame, T) - q) / abs(q))
            print(f"eps={eps} T={T}: max rel deviation {local:.2e}")
            worst = max(worst, local)
    print(f"overall: {worst:.2e}")


def contraction(tau: float = 0.9165) -> None:
    print("C2     display H(1)   series sum(-sigma_m (m+1) C2^m)/tau   min alpha (display)")
    for c2 in (0.1, 0.2, 0.3, 0.4, 0.45):
        series = sum(-sigma(m) * (m + 1) * c2**m for m in range(1, 800)) / tau
        closed = (1.0 - 1.0 / math.sqrt(1.0 + 2.0 * c2)) / tau
        assert abs(series - closed) < 1e-12
        print(f"{c2:<5} {contraction_bound(1.0, tau, c2):12.6f}   {series:12.6f}   {min_contraction_alpha(tau, c2):12.6f}")


if __name__ == "__main__":
    j_grid()
    contraction()
