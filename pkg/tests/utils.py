import cmath
import math

import torch

from ddshaper.core.signal import SampledSignal, SpectrumSignal


def random_complex(n, seed=0):
    generator = torch.Generator().manual_seed(seed)
    re = torch.randn(n, generator=generator, dtype=torch.float64)
    im = torch.randn(n, generator=generator, dtype=torch.float64)
    return torch.complex(re, im)


def random_signal(grid, count, seed=0, t0=0.0):
    return SampledSignal(t0=t0, dt=grid.dt, samples=random_complex(count, seed))


def sample(x: SampledSignal, t: float) -> complex:
    i = round((t - x.t0) / x.dt)
    if abs((t - x.t0) / x.dt - i) > 1e-6 or i < 0 or i >= len(x):
        return 0j
    return complex(x.samples[i])


def zak_brute(x: SampledSignal, T: float, tau: float, nu: float) -> complex:
    k_max = math.ceil((x.end - tau) / T) + 1
    k_min = math.floor((x.t0 - tau) / T) - 1
    total = sum(sample(x, tau + k * T) * cmath.exp(-2j * math.pi * k * nu * T) for k in range(k_min, k_max + 1))
    return math.sqrt(T) * total


def ambiguity_brute(x: SampledSignal, y: SampledSignal, tau: float, nu: float) -> complex:
    total = 0j
    for i in range(len(x)):
        t = x.t0 + i * x.dt
        total += complex(x.samples[i]) * sample(y, t - tau).conjugate() * cmath.exp(-2j * math.pi * nu * (t - tau))
    return x.dt * total


def dzt_brute(x, M, N):
    Z = torch.zeros(M, N, dtype=torch.complex128)
    for l in range(M):
        for k in range(N):
            Z[l, k] = sum(complex(x[l + n * M]) * cmath.exp(-2j * math.pi * k * n / N) for n in range(N)) / math.sqrt(N)
    return Z


def spectrum_sample(X: SpectrumSignal, f: float) -> complex:
    i = round((f - X.f0) / X.df)
    if abs((f - X.f0) / X.df - i) > 1e-6 or i < 0 or i >= len(X):
        return 0j
    return complex(X.samples[i])


def dd_image_brute(atoms, grid, l, k, tau, nu, periods=range(-3, 4)):
    T = grid.T
    tau_l, nu_k = grid.tau(l), grid.nu(k)
    total = 0j
    for n in periods:
        for m in periods:
            term = sample(atoms.h_tau, tau - tau_l - n * T) * spectrum_sample(atoms.H_nu, nu - nu_k - m / T)
            total += term * cmath.exp(2j * math.pi * n * (nu - nu_k) * T)
    return cmath.exp(2j * math.pi * nu_k * (tau - tau_l)) * total
