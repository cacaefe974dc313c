"""Compare both sides of the Fourier counting identity as the truncation T grows.

Run: python3 demos/fourier_identity.py
"""
from fractions import Fraction

from dyadcantor.fourier import FourierParams, fourier_lhs, fourier_rhs

for T in (4, 8, 16, 32, 64):
    p = FourierParams(n=3, k=2, L=5, M=14, T=T, y=Fraction(1, 7))
    lhs = fourier_lhs(p)
    rhs = fourier_rhs(p)
    err = abs(lhs - rhs.main)
    print(f"T={T:3d}  lhs={lhs:.10f}  main={rhs.main:.10f}  zero_mode={rhs.zero_mode:.4f}  "
          f"err={err:.3e}  err/scale={err / p.error_scale():.4f}")
