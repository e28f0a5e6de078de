"""Recompute the published PRE grid and print it as markdown, flagging mismatches."""

import sys

from auxmean import report


def main():
    tables = report.reproduce_tables()
    sys.stdout.write(report.tables_to_markdown(tables))
    for k, t in enumerate(tables, start=1):
        for cell in list(t.rows) + list(t.weights):
            label = getattr(cell, "label", getattr(cell, "name", ""))
            if cell.status.startswith("mismatch"):
                note = report.mismatch_note(label, cell.lam, k) or "undocumented"
                print(f"population {k}: {label} λ={cell.lam}: {note}")


if __name__ == "__main__":
    main()
