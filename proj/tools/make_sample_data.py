#!/usr/bin/env python3
"""Regenerate the synthetic sample CSVs in data/.

Both files are simulated; they only mimic the column layout of a daily
water-table record and a daily index/constituent return panel.
"""
import argparse
from pathlib import Path

import numpy as np
import pandas as pd


def ar_noise(rng, n, phi, sd):
    e = np.zeros(n)
    u = rng.normal(0.0, sd, n)
    for t in range(n):
        acc = u[t]
        for l, c in enumerate(phi, start=1):
            if t - l >= 0:
                acc += c * e[t - l]
        e[t] = acc
    return e


def water_table(rng, n=500):
    dates = pd.date_range("2016-01-01", periods=n, freq="D")
    doy = dates.dayofyear.to_numpy()
    season = np.sin(2 * np.pi * (doy - 100) / 365.25)

    wet = rng.random(n) < 0.3
    rain = np.where(wet, rng.gamma(0.8, 9.0, n), 0.0)
    air = 18 + 9 * season + rng.normal(0, 2.5, n)
    soil = 19 + 7 * np.convolve(season, np.ones(5) / 5, mode="same") + rng.normal(0, 1.0, n)
    rh = np.clip(70 - 8 * season + 1.2 * rain + rng.normal(0, 6, n), 15, 100)
    wind = np.abs(3 + rng.normal(0, 1.2, n))
    vapor = np.clip(0.6 + 0.08 * air * rh / 100 + rng.normal(0, 0.1, n), 0.1, None)
    solar = np.clip(17 + 8 * season - 0.25 * rain + rng.normal(0, 3, n), 0.5, None)
    net = 0.62 * solar - 1.5 + rng.normal(0, 1.0, n)
    pet = np.clip(0.16 * solar + 0.05 * air + 0.2 * wind - 0.02 * rh + rng.normal(0, 0.4, n), 0.0, None)
    wdir = rng.uniform(0, 360, n)

    lag = lambda v, k: np.concatenate([np.zeros(k), v[:-k]])
    flow = 2 + 0.15 * rain + 0.25 * lag(rain, 1) + 0.1 * lag(rain, 2) + np.abs(rng.normal(0, 0.5, n))
    depth = (
        -1.4
        + 0.012 * rain
        + 0.02 * lag(rain, 1)
        + 0.03 * lag(rain, 2)
        - 0.05 * pet
        + ar_noise(rng, n, [0.7, -0.2], 0.06)
    )
    depth = np.minimum(depth, -0.02)

    df = pd.DataFrame(
        {
            "date": dates.strftime("%Y-%m-%d"),
            "WTD": depth,
            "DailyFlow": flow,
            "Rainfall": rain,
            "Air_Temp_C": air,
            "Soil_Temp_": soil,
            "RH": rh,
            "Windspeed_": wind,
            "Vapor_Kpa": vapor,
            "PET": pet,
            "Solar_Rad": solar,
            "Net_Rad": net,
            "Wind_Dir": wdir,
        }
    )
    # a few logger dropouts, always interior
    for col, rows in {"WTD": [57, 58, 301], "Air_Temp_C": [120], "RH": [120, 121], "Solar_Rad": [402]}.items():
        df.loc[rows, col] = np.nan
    return df


TICKERS = [
    "AAPL", "MSFT", "AMZN", "NVDA", "GOOGL", "META", "BRK_B", "JPM", "JNJ", "XOM",
    "UNH", "PG", "V", "HD", "CVX", "MA", "PFE", "KO", "PEP", "WMT",
]


def stock_panel(rng, n=400):
    dates = pd.bdate_range("2021-01-04", periods=n)
    market = rng.standard_t(5, n) * 0.009
    betas = rng.uniform(0.6, 1.5, len(TICKERS))
    idio = rng.normal(0, 1, (n, len(TICKERS))) * rng.uniform(0.008, 0.018, len(TICKERS))
    rets = market[:, None] * betas[None, :] + idio
    weights = np.zeros(len(TICKERS))
    weights[:8] = [0.14, 0.12, 0.08, 0.06, 0.05, 0.04, 0.03, 0.03]
    gspc = rets @ weights + 0.45 * market + ar_noise(rng, n, [0.3], 0.0015)
    df = pd.DataFrame(rets, columns=TICKERS)
    df.insert(0, "GSPC", gspc)
    df.insert(0, "date", dates.strftime("%Y-%m-%d"))
    return df


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    water_table(rng).to_csv(out / "water_table_sample.csv", index=False, float_format="%.6g", lineterminator="\n")
    stock_panel(rng).to_csv(out / "sp500_sample.csv", index=False, float_format="%.6g", lineterminator="\n")


if __name__ == "__main__":
    main()
