"""Writes data/co2.csv from the Mauna Loa weekly record bundled with statsmodels.

Weekly readings are averaged per calendar month. The few months without any
reading are filled by linear interpolation between their neighbours, as in
the usual monthly versions of this record. The x column is the month count
since January 1958.

    python3 scripts/fetch_data.py [output path]
"""

import sys

import statsmodels.datasets.co2 as co2


def main() -> None:
    out = sys.argv[1] if len(sys.argv) > 1 else "data/co2.csv"
    weekly = co2.load_pandas().data["co2"]
    monthly = weekly.resample("MS").mean()
    filled = int(monthly.isna().sum())
    monthly = monthly.interpolate(method="linear")
    with open(out, "w") as f:
        f.write("# Mauna Loa CO2 (ppm), monthly means of weekly readings, empty months interpolated; x = months since 1958-01\n")
        f.write("x,y\n")
        for stamp, value in monthly.items():
            month = (stamp.year - 1958) * 12 + stamp.month
            f.write(f"{month},{value:.4f}\n")
    print(f"wrote {len(monthly)} months to {out} ({filled} interpolated)")


if __name__ == "__main__":
    main()
