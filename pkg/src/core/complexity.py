from dataclasses import dataclass, field


@dataclass
class ComplexityTable:
    rows: list = field(default_factory=list)

    def to_markdown(self) -> str:
        lines = [
            "| #W | #L | witness s | weights s | candidates | witness ratio | #W ratio |",
            "|---:|---:|---:|---:|---:|---:|---:|",
        ]
        for row in self.rows:
            ratio = f"{row['witness_ratio']:.2f}" if row.get("witness_ratio") is not None else ""
            size = f"{row['size_ratio']:.2f}" if row.get("size_ratio") is not None else ""
            lines.append(
                f"| {row['n_witnesses']} | {row['n_landmarks']} | {row['t_witness']:.4f} | "
                f"{row['t_weights']:.4f} | {row['candidates']} | {ratio} | {size} |"
            )
        return "\n".join(lines)


def report_complexity(runs: list) -> ComplexityTable:
    """Wall time and candidate counts against #W and #L; ratios are taken against the previous, smaller run."""
    ordered = sorted((r for r in runs if r.get("status") == "ok"),
                     key=lambda r: (r["n_landmarks"], r["n_witnesses"]))
    table = ComplexityTable()
    previous = None
    for run in ordered:
        row = {
            "n_witnesses": run["n_witnesses"],
            "n_landmarks": run["n_landmarks"],
            "t_witness": run.get("t_witness") or 0.0,
            "t_weights": run.get("t_weights") or 0.0,
            "candidates": run.get("candidates") or 0,
            "witness_ratio": None,
            "size_ratio": None,
        }
        if previous is not None and previous["n_landmarks"] == row["n_landmarks"] and previous["t_witness"] > 0:
            row["witness_ratio"] = row["t_witness"] / previous["t_witness"]
            row["size_ratio"] = row["n_witnesses"] / previous["n_witnesses"]
        table.rows.append(row)
        previous = row
    return table
