#!/usr/bin/env python3
"""Regenerates the data fixtures under tests/fixtures/.

Expected values (filter labels, exact scores, eval statistics) are computed
here with Python's fractions/statistics modules so the C++ tests compare
against an independent calculation.
"""
import json
import math
import os
import pathlib
import random
import statistics
from fractions import Fraction

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIX = ROOT / "tests" / "fixtures"


def write(path: pathlib.Path, text: str, executable: bool = False) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    if executable:
        path.chmod(0o755)


def dump_jsonl(path: pathlib.Path, rows) -> None:
    write(path, "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows))


def resp(analysis, plan, commands, complete=None, **extra):
    obj = {"analysis": analysis, "plan": plan, "commands": commands}
    if complete is not None:
        obj["task_complete"] = complete
    obj.update(extra)
    return json.dumps(obj, indent=2)


# ---------------------------------------------------------------------------
# Canonical task layout

def sample_task():
    root = FIX / "tasks" / "sample-task"
    write(root / "instruction.md",
          "Compute the total of the `amount` column in /app/data/input.csv and write it to /app/total.txt.\n")
    write(root / "task.toml",
          'id = "sample-task"\ndomain = "data processing"\nimage_ref = "termgen/data-processing:latest"\n'
          'origin = "skill/data processing"\n\n[limits]\ntimeout_sec = 600\n')
    write(root / "environment" / "Dockerfile", "FROM python:3.11-slim\nWORKDIR /app\nCOPY data /app/data\n")
    write(root / "environment" / "data" / "input.csv", "id,amount\n1,10\n2,32\n")
    write(root / "solution" / "solve.sh",
          "#!/bin/bash\npython3 - <<'EOF'\nimport csv\n"
          "rows = list(csv.DictReader(open('/app/data/input.csv')))\n"
          "open('/app/total.txt', 'w').write(str(sum(int(r['amount']) for r in rows)))\nEOF\n",
          executable=True)
    write(root / "tests" / "test_outputs.py",
          "from pathlib import Path\n\n\ndef test_file_exists():\n    assert Path('/app/total.txt').exists()\n\n\n"
          "def test_total():\n    assert Path('/app/total.txt').read_text().strip() == '42'\n")
    write(root / "tests" / "weights.json", '{\n  "test_file_exists": 1,\n  "test_total": 2\n}\n')

    adapter = FIX / "tasks" / "adapter-shape"
    write(adapter / "instruction.md", "What is 2+2?\n\nPlease place your final answer in a file named `/app/solution.txt`.")
    write(adapter / "task.toml", 'origin = "adapter/math"\n')
    write(adapter / "environment" / "Dockerfile", "FROM python:3.11-slim\nWORKDIR /app\n")


# ---------------------------------------------------------------------------
# Golden end-to-end run: 5 tasks, scripted terminals, scripted model

PROMPT = "root@sandbox:/app# "


def golden():
    base = FIX / "golden"
    tasks = base / "tasks"
    term = base / "terminal"
    model_rows = []

    def task(tid, instruction, tests, weights=None, domain=None, origin="skill/data processing"):
        d = tasks / tid
        toml = 'id = "%s"\norigin = "%s"\n' % (tid, origin)
        if domain:
            toml += 'domain = "%s"\n' % domain
        write(d / "instruction.md", instruction)
        write(d / "task.toml", toml)
        write(d / "environment" / "Dockerfile", "FROM python:3.11-slim\nWORKDIR /app\n")
        write(d / "tests" / "test_outputs.py", tests)
        if weights is not None:
            write(d / "tests" / "weights.json", json.dumps(weights, indent=2) + "\n")

    def frames(tid, items, execs=()):
        rows = [{"after_send_index": i, "text": t} for i, t in items]
        rows += [{"exec": e} for e in execs]
        dump_jsonl(term / (tid + ".jsonl"), rows)

    def model(tid, texts):
        for i, t in enumerate(texts):
            model_rows.append({"task_id": tid, "turn": i, "text": t})

    # 1. two-turn happy path
    task("csv-total", "Sum the amount column of /app/data.csv into /app/total.txt.\n",
         "def test_total():\n    assert open('/app/total.txt').read().strip() == '42'\n", {"test_total": 1},
         domain="data processing")
    frames("csv-total", [
        (0, PROMPT),
        (1, PROMPT + "cat data.csv\nid,amount\n1,10\n2,32\n" + PROMPT),
        (2, PROMPT + "cat data.csv\nid,amount\n1,10\n2,32\n" + PROMPT +
         "python3 -c \"import csv;print(sum(int(r['amount']) for r in csv.DictReader(open('data.csv'))))\" > total.txt\n" + PROMPT),
    ], execs=[{"exit_code": 0, "output": "\n===TERMGEN-REPORT===\ntest_total PASS\n"}])
    model("csv-total", [
        resp("The directory has data.csv.", "Inspect the file first.",
             [{"keystrokes": "cat data.csv\n", "duration": 0.5}], False),
        resp("The file has two rows.", "Sum the column with Python and finish.",
             [{"keystrokes": "python3 -c \"import csv;print(sum(int(r['amount']) for r in csv.DictReader(open('data.csv'))))\" > total.txt\n",
               "duration": 1.0}], True),
    ])

    # 2. the response-format example payload, completes in one turn
    task("list-project", "List the workspace and enter the project directory.\n",
         "def test_a():\n    assert True\n\n\ndef test_b():\n    assert False\n", {"test_a": 2, "test_b": 1},
         origin="adapter/code")
    frames("list-project", [
        (0, PROMPT),
        (1, PROMPT + "ls -la\ntotal 8\ndrwxr-xr-x 2 root root 4096 project\n" + PROMPT),
        (2, PROMPT + "ls -la\ntotal 8\ndrwxr-xr-x 2 root root 4096 project\n" + PROMPT + "cd project\n" +
         "root@sandbox:/app/project# "),
    ], execs=[{"exit_code": 1, "output": "\n===TERMGEN-REPORT===\ntest_a PASS\ntest_b FAIL\n"}])
    model("list-project", [
        '{\n  "analysis": "...",\n  "plan": "...",\n  "commands": [\n    {\n      "keystrokes": "ls -la\\n",\n'
        '      "duration": 0.1\n    },\n    {\n      "keystrokes": "cd project\\n",\n      "duration": 0.1\n'
        '    }\n  ],\n  "task_complete": true\n}',
    ])

    # 3. a malformed reply, then recovery
    task("fix-script", "Make /app/run.sh executable and run it.\n",
         "def test_ran():\n    assert True\n", None, domain="debugging", origin="skill/debugging")
    frames("fix-script", [
        (0, PROMPT),
        (1, PROMPT + "chmod +x run.sh && ./run.sh\nok\n" + PROMPT),
    ], execs=[{"exit_code": 0, "output": "\n===TERMGEN-REPORT===\ntest_ran PASS\n"}])
    model("fix-script", [
        "Sure, I will fix the script now.",
        resp("Previous reply was not JSON.", "Fix permissions and run.",
             [{"keystrokes": "chmod +x run.sh && ./run.sh\n", "duration": 0.2}], True),
    ])

    # 4. never completes: waits, over-long duration, turn limit
    task("long-build", "Wait for the build in /app/build.log to finish.\n",
         "def test_done():\n    assert False\n", None, origin="seed")
    frames("long-build", [
        (0, PROMPT + "make all\n[1/3] compiling\n"),
        (1, PROMPT + "make all\n[1/3] compiling\n[2/3] linking\n"),
    ], execs=[{"exit_code": 1, "output": "\n===TERMGEN-REPORT===\ntest_done FAIL\n"}])
    model("long-build", [
        resp("Build running.", "Wait.", [], False),
        resp("Still running.", "Wait longer.", [{"keystrokes": "", "duration": 120}], False),
        resp("Still running.", "Wait.", [], False),
        resp("Still running.", "Wait.", [], False),
    ])

    # 5. interrupt, surrounding text, unknown field
    task("stuck-process", "A command is hanging. Interrupt it and print the word done.\n",
         "def test_done():\n    assert True\n", {"test_done": 1}, domain="security", origin="skill/security")
    frames("stuck-process", [
        (0, PROMPT + "sleep 1000\n"),
        (1, PROMPT + "sleep 1000\n^C\n" + PROMPT),
        (2, PROMPT + "sleep 1000\n^C\n" + PROMPT + "echo done\ndone\n" + PROMPT),
    ], execs=[{"exit_code": 0, "output": "\n===TERMGEN-REPORT===\ntest_done PASS\n"}])
    model("stuck-process", [
        "I need to interrupt first.\n" + resp("A sleep is blocking.", "Send Ctrl+C.",
                                              [{"keystrokes": "C-c", "duration": 0.1}], False, confidence=0.9),
        resp("Prompt is back.", "Print done.", [{"keystrokes": "echo done\n"}], True) + "\nDone.",
    ])

    dump_jsonl(base / "model.jsonl", model_rows)


# ---------------------------------------------------------------------------
# Filter fixture: 100 trajectories with statuses and exact scores, labeled
# independently of the C++ implementation.

def filters():
    rng = random.Random(20240601)
    statuses = ["completed", "incomplete", "error"]
    scores = [Fraction(1), Fraction(2, 3), Fraction(0), Fraction(1, 2), Fraction(1), Fraction(5, 6)]
    rows = []
    for i in range(100):
        status = rng.choice(statuses)
        score = rng.choice(scores)
        rows.append({
            "task_id": "task-%03d" % (i // 2),
            "trial": i % 2,
            "status": status,
            "score": "%d/%d" % (score.numerator, score.denominator) if score.denominator != 1 else str(score.numerator),
            "expect_complete": status == "completed",
            "expect_success": score == 1,
        })
    dump_jsonl(FIX / "filters" / "trajectories.jsonl", rows)


# ---------------------------------------------------------------------------
# Weighted scoring cases, hand-sized, exact expectations via Fraction

def scoring():
    cases = [
        ({"a": 2, "b": 1}, {"a": True, "b": False}),
        ({"a": 1, "b": 1}, {"a": True, "b": True}),
        ({"a": 1, "b": 1, "c": 1}, {"a": True, "b": False, "c": False}),
        (None, {"x": True, "y": False, "z": True, "w": False}),
        ({"p": 0.5, "q": 0.25, "r": 0.25}, {"p": False, "q": True, "r": True}),
        ({"p": 3, "q": 0}, {"p": False, "q": True}),
        ({"t1": 7, "t2": 5, "t3": 1}, {"t1": True, "t2": False, "t3": True}),
        ({"only": 4}, {"only": False}),
        ({"a": 1, "b": 2, "c": 3, "d": 4}, {"a": True, "b": True, "c": False, "d": True}),
        ({"a": 1, "missing": 1}, {"a": True}),
    ]
    out = []
    for weights, passed in cases:
        names = sorted(set(passed) | set(weights or {}))
        w = {n: Fraction(str(weights[n])) for n in weights} if weights else {n: Fraction(1) for n in passed}
        total = sum(w.values())
        earned = sum(v for n, v in w.items() if passed.get(n, False))
        score = earned / total
        out.append({"weights": weights, "passed": passed,
                    "expected": "%d/%d" % (score.numerator, score.denominator)})
    write(FIX / "scoring" / "cases.json", json.dumps(out, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Evaluation aggregation cases with statistics.stdev as the reference

def eval_cases():
    rng = random.Random(7)
    cases = []
    fixed = [
        [("a", 0, 1.0), ("b", 0, 0.0)],
        [("a", 0, 1.0), ("b", 0, 1.0), ("c", 0, 1.0)],
        [("solo", 0, 1.0), ("solo", 1, 0.0)],
    ]
    for _ in range(7):
        n_tasks = rng.randint(2, 6)
        recs = []
        for t in range(n_tasks):
            for trial in range(rng.randint(1, 3)):
                if len(recs) >= 20:
                    break
                recs.append(("t%d" % t, trial, rng.choice([0.0, 1.0, 0.5, 0.25, 2.0 / 3.0])))
        fixed.append(recs)
    for recs in fixed:
        by_task = {}
        for tid, _, s in recs:
            by_task.setdefault(tid, []).append(s)
        means = [statistics.fmean(v) for _, v in sorted(by_task.items())]
        mean = statistics.fmean(means) * 100
        se = statistics.stdev(means) / math.sqrt(len(means)) * 100 if len(means) > 1 else 0.0
        cases.append({"records": [{"task_id": a, "trial": b, "score": c} for a, b, c in recs],
                      "expected_mean": mean, "expected_stderr": se, "single_task": len(means) == 1})
    write(FIX / "eval" / "cases.json", json.dumps(cases, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Generation-output corpus: 20 well-formed, 10 defective

def generation():
    rows = []
    rng = random.Random(99)
    for i in range(20):
        prompt = "Task %d: read /app/data/in_%d.csv and write the per-group totals to /app/out_%d.json." % (i, i, i)
        tests = ("import json\n\n\ndef test_exists():\n    assert open('/app/out_%d.json')\n\n\n"
                 "def test_values():\n    data = json.load(open('/app/out_%d.json'))\n    assert data['g%d'] == %d\n"
                 % (i, i, i, i * 3))
        weights = {"test_exists": 1, "test_values": rng.choice([1, 2, 3])} if i % 3 else {}
        files = {"data/in_%d.csv" % i: "group,value\ng%d,%d\n" % (i, i * 3)} if i % 2 == 0 else {}
        if i % 5 == 0:
            files["config/settings.json"] = '{"mode": "strict"}'
        reqs = ["pytest", "pandas"] if i % 4 == 0 else []
        info = "difficulty: medium\nskills: csv, aggregation" if i % 2 else ""
        raw = "Here is the task.\n\n<prompt>\n%s\n</prompt>\n\n<tests>\n%s\n</tests>\n" % (prompt, tests.rstrip("\n"))
        if weights:
            raw += "<weights>\n%s\n</weights>\n" % json.dumps(weights)
        raw += "<info>\n%s\n</info>\n" % info
        if files:
            raw += "<files>\n" + "".join("--- path: %s\n%s\n" % (p, c) for p, c in sorted(files.items())) + "</files>\n"
        if reqs:
            raw += "<test_requirements>\n" + "\n".join(reqs) + "\n</test_requirements>\n"
        rows.append({"raw": raw, "expect": "ok",
                     "prompt": prompt, "tests": tests.rstrip("\n"), "weights": weights, "info": info,
                     "files": files, "test_requirements": reqs})
    good_tests = "def test_ok():\n    assert True"
    defects = [
        ("<tests>\n%s\n</tests>" % good_tests, "MissingRequiredTag"),
        ("<prompt>\nDo the thing.\n</prompt>", "MissingRequiredTag"),
        ("<prompt>\n\n</prompt>\n<tests>\n%s\n</tests>" % good_tests, "MissingRequiredTag"),
        ("<prompt>\nDo it.\n</prompt>\n<tests>\n%s\n</tests>\n<weights>\n{not json}\n</weights>" % good_tests,
         "MalformedWeights"),
        ("<prompt>\nDo it.\n</prompt>\n<tests>\n%s\n</tests>\n<weights>\n[1, 2]\n</weights>" % good_tests,
         "MalformedWeights"),
        ("<prompt>\nDo it.\n</prompt>\n<tests>\n%s\n</tests>\n<weights>\n{\"test_ok\": -1}\n</weights>" % good_tests,
         "MalformedWeights"),
        ("<prompt>\nDo it.\n</prompt>\n<tests>\n%s\n</tests>\n<weights>\n{\"test_ok\": \"high\"}\n</weights>"
         % good_tests, "MalformedWeights"),
        ("<prompt>\nDo it.\n</prompt>\n<tests>\n%s\n</tests>\n<files>\nstray text\n--- path: a.txt\nx\n</files>"
         % good_tests, "MalformedFiles"),
        ("<prompt>\nDo it.\n</prompt>\n<tests>\n%s\n</tests>\n<files>\n--- path: ../escape.txt\nx\n</files>"
         % good_tests, "MalformedFiles"),
        ("<prompt>\nDo it.\n</prompt>\n<tests>\n%s\n</tests>\n<files>\n--- path: a.txt\nx\n--- path: a.txt\ny\n</files>"
         % good_tests, "MalformedFiles"),
    ]
    for raw, code in defects:
        rows.append({"raw": raw, "expect": code})
    dump_jsonl(FIX / "generation" / "corpus.jsonl", rows)


def main():
    sample_task()
    golden()
    filters()
    scoring()
    eval_cases()
    generation()


if __name__ == "__main__":
    main()
