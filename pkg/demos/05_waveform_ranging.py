"""From a sampled pulse and a multipath channel to a ranging intensity.

The distance information carried by one received waveform is
lambda = 8 pi^2 beta^2 (1 - chi) SNR1 / c^2: the pulse's RMS bandwidth
beta sets the delay resolution, SNR1 is the first arrival's SNR, and the
path-overlap coefficient chi measures how much of the first arrival's
delay information later arrivals destroy. Sweeping the second arrival's
lag shows chi collapsing to zero once the arrivals stop overlapping.
"""

from locbounds import (
    MultipathChannel,
    effective_bandwidth,
    first_contiguous_cluster,
    first_path_snr,
    gaussian_pulse,
    path_overlap_chi,
    psi_matrix,
    rii_no_prior,
)

sigma = 1.0e-9  # 1 ns RMS width
pulse = gaussian_pulse(sigma, n0_half=1.0, c=3.0e8)
beta = effective_bandwidth(pulse)
print(f"pulse: unit-energy Gaussian, RMS width {sigma * 1e9:.1f} ns")
print(f"effective bandwidth beta = {beta / 1e6:.1f} MHz")
print(f"support (99.99% energy) = {pulse.support_length * 1e9:.1f} ns\n")

los = MultipathChannel([20e-9], [1.0])
print(f"single LOS path: SNR1 = {first_path_snr(pulse, los):.3f}, "
      f"lambda = {rii_no_prior(pulse, los):.4f} 1/m^2\n")

print("two equal-amplitude arrivals, second at lag dt:")
print(f"{'lag/sigma':>10} {'chi':>10} {'lambda':>10} {'cluster':>8}")
single = rii_no_prior(pulse, los)
for lag in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0):
    ch = MultipathChannel([20e-9, 20e-9 + lag * sigma], [1.0, 1.0])
    cluster = first_contiguous_cluster(pulse, ch)
    if cluster.n_paths == 1:
        chi = 0.0
    else:
        chi = path_overlap_chi(psi_matrix(pulse, cluster))
    lam = rii_no_prior(pulse, ch)
    print(f"{lag:>10.2f} {chi:>10.5f} {lam:>10.4f} {cluster.n_paths:>8}")

print(f"\n(single-path value {single:.4f}; overlap only ever discounts it)")

nlos = MultipathChannel([20e-9], [1.0], los=False)
print(f"NLOS path, no channel prior: lambda = {rii_no_prior(pulse, nlos):.1f}")
print("(the bias is unknown, so the arrival carries no distance information)")
