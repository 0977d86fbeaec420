"""Generate a line-of-sight self-interference channel, write it in both file
formats, read it back and cut out the tile and band the solver works on."""

import tempfile
from pathlib import Path

import numpy as np

from fdsis import ArrayLayout, SiChannel, extract_subarray, load_channel, save_channel, slice_band, synthetic_channel

ch = synthetic_channel()
print("full channel:", ch.summary())

band = slice_band(ch, 3.5e9, 20e6)
# the CSV text form of all 1601 points is bulky, so that file gets the 20 MHz slice only
in_band = SiChannel(ch.tensor[:, :, band.slice], ch.freqs_hz[band.slice], ch.tx_layout, ch.rx_layout)

with tempfile.TemporaryDirectory() as tmp:
    for name, original in (("h.sich", ch), ("h.csv", in_band)):
        path = save_channel(original, Path(tmp) / name)
        back = load_channel(path)
        same = np.array_equal(back.tensor, original.tensor) and np.array_equal(back.freqs_hz, original.freqs_hz)
        print(f"{name}: {path.stat().st_size / 1e6:.1f} MB, round trip exact: {same}")

print(f"20 MHz at 3.5 GHz: {band.n} grid points starting at index {band.start}")
print(f"100 MHz at 3.5 GHz: {slice_band(ch, 3.5e9, 100e6).n} grid points")

tile = extract_subarray(ch, 0, 0, ArrayLayout(2, 2), ArrayLayout(2, 2))
mag_db = 20 * np.log10(np.abs(tile.tensor[:, :, band.slice]))
print(f"2x2 tile coupling over the band: {mag_db.min():.1f} to {mag_db.max():.1f} dB")
