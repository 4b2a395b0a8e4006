"""Chirp spread spectrum baseband: symbol generation, dechirp demodulation,
and the closed-form delay/frequency-offset relations of the superposed link.

All signals are complex baseband. Generated chirps have unit amplitude;
every gain lives in the channel model.
"""

import numpy as np

C_LIGHT = 299_792_458.0  # m/s

# Carrier packet layout used throughout: ten base up-chirps, a 2.25-symbol
# down-chirp sync tail, then the payload chirps.
PREAMBLE_SYMBOLS = 10
SYNC_SYMBOLS = 2.25


class ConfigurationError(ValueError):
    """Raised for inconsistent PHY parameter combinations."""


class LoRaParams:
    """PHY configuration: spreading factor, bandwidth, sample rate.

    Derived quantities:
        n_symbols        2**sf possible symbol values
        t_chirp          symbol duration, 2**sf / bw  [s]
        slope            chirp rate bw**2 / 2**sf     [Hz/s]
        bin_width        bw / 2**sf                   [Hz]
        osr              oversampling ratio fs / bw (must be an integer)
        samples_per_symbol = osr * 2**sf
    """

    def __init__(self, sf=7, bw=125e3, fs=1e6, f0=None):
        if not isinstance(sf, int) or not 7 <= sf <= 12:
            raise ConfigurationError("sf must be an integer in [7, 12]")
        if bw <= 0 or fs <= 0:
            raise ConfigurationError("bw and fs must be positive")
        if fs < 2 * bw:
            raise ConfigurationError(f"fs={fs} violates Nyquist (need >= {2 * bw})")
        osr = round(fs / bw)
        if abs(fs - osr * bw) > 1e-6 * bw:
            raise ConfigurationError(
                f"fs={fs} and bw={bw} are incommensurate (fs must be an integer multiple of bw)")
        self.sf = sf
        self.bw = float(bw)
        self.fs = float(fs)
        self.f0 = -self.bw / 2 if f0 is None else float(f0)
        self.osr = osr
        self.n_symbols = 1 << sf
        self.t_chirp = self.n_symbols / self.bw
        self.slope = self.bw ** 2 / self.n_symbols
        self.bin_width = self.bw / self.n_symbols
        self.samples_per_symbol = osr * self.n_symbols

    def __repr__(self):
        return f"LoRaParams(sf={self.sf}, bw={self.bw:g}, fs={self.fs:g}, f0={self.f0:g})"

    def __eq__(self, other):
        return (isinstance(other, LoRaParams)
                and (self.sf, self.bw, self.fs, self.f0) == (other.sf, other.bw, other.fs, other.f0))


class IqBuffer:
    """A finite run of complex baseband samples at a fixed sample rate."""

    def __init__(self, samples, fs):
        samples = np.asarray(samples, dtype=np.complex128)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples.view(np.float64))):
            raise ValueError("samples must be finite")
        if fs <= 0:
            raise ValueError("fs must be positive")
        self.samples = samples
        self.fs = float(fs)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.fs


def _symbol_phase(params, symbol, t):
    """Unwrapped phase (rad) of the chirp encoding ``symbol`` at times ``t``.

    The instantaneous frequency starts at f0 + symbol*bin_width, sweeps at
    the chirp rate, and wraps from +bw/2 back to -bw/2 once it exceeds the
    band edge; phase stays continuous across the wrap.
    """
    f_start = params.f0 + symbol * params.bin_width
    t_wrap = (params.bw / 2 - f_start) / params.slope
    phase = 2 * np.pi * (f_start * t + 0.5 * params.slope * t ** 2)
    late = t > t_wrap
    if np.any(late):
        phi_wrap = 2 * np.pi * (f_start * t_wrap + 0.5 * params.slope * t_wrap ** 2)
        u = t[late] - t_wrap
        phase[late] = phi_wrap + 2 * np.pi * (-params.bw / 2 * u + 0.5 * params.slope * u ** 2)
    return phase


def symbol_end_phase(params, symbol):
    """Phase at the end of one symbol, for phase-continuous packet assembly."""
    return _symbol_phase(params, symbol, np.array([params.t_chirp]))[0]


def gen_chirp(params, symbol):
    """One symbol of up-chirp encoding ``symbol`` as a cyclic frequency shift."""
    if not 0 <= symbol < params.n_symbols:
        raise ValueError(f"symbol {symbol} out of range [0, {params.n_symbols})")
    t = np.arange(params.samples_per_symbol) / params.fs
    return IqBuffer(np.exp(1j * _symbol_phase(params, symbol, t)), params.fs)


def gen_downchirp(params):
    """One symbol of down-chirp: the complex conjugate of the base up-chirp."""
    return IqBuffer(np.conj(gen_chirp(params, 0).samples), params.fs)


def demod_symbol(params, window):
    """Dechirp one symbol window and locate the FFT peak.

    The dechirped product at fs is decimated to one sample per chip so the
    spectrum folds onto 2**sf bins; the pre- and post-wrap tone segments
    alias onto the same bin and add coherently, making the peak index the
    symbol value at any oversampling ratio. Returns (symbol, peak magnitude).
    """
    if isinstance(window, IqBuffer):
        window = window.samples
    if window.size != params.samples_per_symbol:
        raise ValueError(
            f"window length {window.size} != samples_per_symbol {params.samples_per_symbol}")
    product = window * gen_downchirp(params).samples
    spectrum = np.fft.fft(product[::params.osr])
    mags = np.abs(spectrum)
    peak = int(np.argmax(mags))
    return peak, float(mags[peak])


def demod_downchirp(params, window):
    """Peak magnitude of a window dechirped as a down-chirp (sync-tail test)."""
    if isinstance(window, IqBuffer):
        window = window.samples
    if window.size != params.samples_per_symbol:
        raise ValueError("window length mismatch")
    product = window * gen_chirp(params, 0).samples
    mags = np.abs(np.fft.fft(product[::params.osr]))
    peak = int(np.argmax(mags))
    return peak, float(mags[peak])


def freq_offset(params, path_diff_m):
    """Spectral offset between carrier and backscatter for an extra path.

    Equals bw**2 / 2**sf * d / c: the chirp rate times the propagation delay
    of the longer path.
    """
    if path_diff_m < 0:
        raise ValueError("path difference must be >= 0")
    return params.slope * path_diff_m / C_LIGHT


def phase_offset(params, t, t_d):
    """Phase difference at time t between a chirp and its copy delayed by t_d."""
    return 2 * np.pi * ((params.f0 + params.slope * t) * t_d - 0.5 * params.slope * t_d ** 2)


def fft_bin_width(params):
    """Frequency resolution of symbol-rate dechirped demodulation."""
    return params.bin_width


def _sync_tail_pieces(params):
    """The 2.25-symbol down-chirp tail as (samples, end_phase) pieces."""
    down = gen_downchirp(params).samples
    quarter = params.samples_per_symbol // 4
    t_q = quarter / params.fs
    # down-chirp phase is the negated base-chirp phase
    q_end = -_symbol_phase(params, 0, np.array([t_q]))[0]
    return [(down, 0.0), (down, 0.0), (down[:quarter], q_end)]


def sync_tail(params):
    """The 2.25-symbol phase-continuous down-chirp tail of a packet."""
    pieces = _sync_tail_pieces(params)
    out = []
    acc = 0.0
    for samples, end_phase in pieces:
        out.append(samples * np.exp(1j * acc))
        acc += end_phase
    return IqBuffer(np.concatenate(out), params.fs)


def build_packet(params, payload_symbols):
    """Assemble a phase-continuous packet: preamble, sync tail, payload.

    Phase continuity across symbol boundaries matters: the receiver's
    per-window dechirp then leaves a constant phase step at each boundary,
    which is exactly what the alignment stage must remove.
    """
    payload_symbols = list(payload_symbols)
    for s in payload_symbols:
        if not 0 <= s < params.n_symbols:
            raise ValueError(f"symbol {s} out of range")
    pieces = []
    acc = 0.0
    base = gen_chirp(params, 0).samples
    for _ in range(PREAMBLE_SYMBOLS):
        pieces.append(base * np.exp(1j * acc))
        acc += symbol_end_phase(params, 0)
    for samples, end_phase in _sync_tail_pieces(params):
        pieces.append(samples * np.exp(1j * acc))
        acc += end_phase
    for s in payload_symbols:
        pieces.append(gen_chirp(params, s).samples * np.exp(1j * acc))
        acc += symbol_end_phase(params, s)
    return IqBuffer(np.concatenate(pieces), params.fs)


def payload_start_time(params):
    """Seconds from packet start to the first payload sample."""
    return (PREAMBLE_SYMBOLS + SYNC_SYMBOLS) * params.t_chirp
