"""Rendering verdict matrices as text."""
import json

FORMATS = ("table", "tsv", "records")
PASS, FAIL, MISSING = "✓", "✗", "-"


def requirement_order(analyses):
    """Requirement names in order of first appearance."""
    names = []
    for a in analyses:
        for v in a.verdicts:
            if v.name not in names:
                names.append(v.name)
    return names


def render_table(analyses, witnesses=False):
    names = requirement_order(analyses)
    first = max([len("system")] + [len(a.name) for a in analyses])
    widths = [max(len(n), 1) for n in names]
    head = "system".ljust(first) + "".join("  " + n.ljust(w) for n, w in zip(names, widths))
    lines = [head.rstrip()]
    for a in analyses:
        got = {v.name: v for v in a.verdicts}
        cells = []
        for n, w in zip(names, widths):
            v = got.get(n)
            mark = MISSING if v is None else (PASS if v.passed else FAIL)
            cells.append("  " + mark.ljust(w))
        lines.append((a.name.ljust(first) + "".join(cells)).rstrip())
    if witnesses:
        lines.append("")
        for a in analyses:
            for v in a.verdicts:
                lines.append(f"{a.name} {v.name}: {v.witness}")
    return "\n".join(lines) + "\n"


def render_tsv(analyses):
    lines = ["system\trequirement\tverdict\twitness"]
    for a in analyses:
        for v in a.verdicts:
            w = v.witness.replace("\t", " ").replace("\n", " ")
            lines.append(f"{a.name}\t{v.name}\t{'pass' if v.passed else 'fail'}\t{w}")
    return "\n".join(lines) + "\n"


def render_records(analyses):
    lines = []
    for a in analyses:
        for v in a.verdicts:
            verdict = "pass" if v.passed else "fail"
            lines.append(f"system={a.name} requirement={v.name} verdict={verdict} witness={json.dumps(v.witness)}")
    return "\n".join(lines) + ("\n" if lines else "")


def render_report(analyses, fmt="table", witnesses=False):
    if fmt == "table":
        return render_table(analyses, witnesses)
    if fmt == "tsv":
        return render_tsv(analyses)
    if fmt == "records":
        return render_records(analyses)
    raise ValueError(f"unknown format {fmt}; use one of {', '.join(FORMATS)}")


def parse_tsv(text):
    """{(system, requirement): passed} from :func:`render_tsv` output."""
    out = {}
    rows = text.splitlines()
    for row in rows[1:]:
        system, name, verdict, _ = row.split("\t", 3)
        out[(system, name)] = verdict == "pass"
    return out
