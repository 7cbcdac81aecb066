#!/usr/bin/env python3
"""Regenerates include/termgen/domain_assets.hpp and data/domains/ from the
domain module sources below and the module tables in a source document.

usage: gen_domain_assets.py <source.md>"""
import json
import pathlib
import re
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent

# name -> (module title in source, skills)
DOMAINS = [
    ("data processing", "Data Processing", [
        "Build transformation pipelines with interpolation and feature extraction",
        "Convert between CSV, JSON Lines, and Parquet with schema enforcement",
        "Deduplicate and merge records from multiple sources",
        "Normalize and extract fields from messy free text with regular expressions",
        "Stream-process files too large to fit in memory",
        "Compute rolling statistics and normalization over grouped data",
        "Resample and align irregular time series",
        "Chain shell tools (awk, sed, sort, jq) into an ETL pipeline",
        "Validate outputs against a schema and report offending rows",
    ]),
    ("data querying", "Data Querying", [
        "Writing queries using the formal syntax of declarative query languages for structured data",
        "Compose SQL with joins, window functions, and common table expressions",
        "Infer schema and relationships from an unfamiliar database",
        "Answer path and neighborhood queries over graph-structured data",
        "Paginate, aggregate, and export query results in a required format",
        "Create indexes and compare execution plans to speed up slow queries",
    ]),
    ("data science", "Data Science", [
        "Load and transform tabular data with groupby, filtering, and aggregation",
        "Build reproducible analysis scripts runnable from the command line",
        "Impute missing values and encode categorical features",
        "Implement clustering or anomaly detection from scratch",
        "Fit regression models and run hypothesis tests with correct statistics",
        "Validate model metrics on held-out data with fixed random seeds",
        "Anonymize personally identifiable fields before analysis",
    ]),
    ("debugging", "Debugging", [
        "Resolve package dependency conflicts through constraint analysis",
        "Diagnose crashing services from logs, exit codes, and core dumps",
        "Bisect a regression across revisions to find the breaking change",
        "Reproduce intermittent failures with a deterministic test case",
        "Fix off-by-one and boundary errors in algorithmic code",
        "Trace corrupted records through a multi-stage data pipeline",
        "Correct numerical instability and floating-point precision bugs",
    ]),
    ("dependency management", None, [
        "Resolve package dependency conflicts through constraint analysis",
        "Pin and lock transitive dependency versions reproducibly",
        "Build isolated virtual environments for conflicting toolchains",
        "Vendor or patch a broken upstream package",
        "Audit installed packages for known-vulnerable versions",
        "Compute minimal upgrade sets that satisfy semantic version ranges",
    ]),
    ("file operations", "File Operations", [
        "Parse structured formats (JSON/XML/CSV) with encoding and validation",
        "Read and write binary files with fixed-width records and seeking",
        "Traverse directory trees with filters on size, age, and permissions",
        "Detect and convert text encodings and line endings",
        "Rename and reorganize files according to metadata-driven rules",
        "Create, inspect, and selectively extract tar, zip, and gzip archives",
        "Reclaim disk space by deduplicating files via hashes and hard links",
        "Download remote files, verify their checksums, and mirror them locally",
    ]),
    ("scientific computing", "Scientific Computing", [
        "Computing distance metrics between discrete probability distributions",
        "Parse instrument or simulation output files into analysis-ready arrays",
        "Implement numerical integration or ODE solvers with error control",
        "Apply FFT-based filtering and spectral analysis to signals",
        "Run parameter sweeps as batch jobs and collect the results",
        "Verify numerical results against analytic solutions within tolerances",
        "Estimate parameters with Monte Carlo sampling and report confidence intervals",
        "Verify the integrity of downloaded datasets with checksums",
    ]),
    ("security", "Security", [
        "Craft exploit payloads to bypass authentication and identify vulnerabilities",
        "Audit file permissions and setuid binaries for privilege-escalation paths",
        "Parse and correlate authentication logs to reconstruct an intrusion timeline",
        "Validate and forge signed session tokens to test authentication logic",
        "Recover keys or plaintext from weak or misused cryptographic constructions",
        "Write verification scripts that confirm a vulnerability is patched",
    ]),
    ("software engineering", "Software Engineering", [
        "Implement graph traversal (BFS/DFS) for dependency resolution",
        "Design caching layers with explicit eviction policies",
        "Fix build configurations and linker errors in multi-module projects",
        "Implement a serializer and parser for a custom wire or config format",
        "Build an HTTP API with input validation and authenticated endpoints",
        "Write regression tests that pin down behavior before refactoring",
        "Evaluate semantic version range constraints exactly",
    ]),
    ("system administration", "System Administration", [
        "Manage file permissions, configure services, and automate tasks with shell scripts",
        "Set up directory layouts, quotas, and ACLs for multiple users",
        "Write and supervise daemons with restart policies",
        "Configure local proxies, ports, and firewall rules",
        "Template configuration files and validate them before reload",
        "Script idempotent installation and upgrade procedures",
        "Summarize system logs into metrics reports",
        "Harden SSH and service configurations",
        "Write robust shell scripts with error handling and traps",
        "Write health checks that verify a service is correctly configured",
        "Schedule dependent jobs with cron-style rules",
    ]),
]

ACTIVE_BY_DEFAULT = {name for name, _, _ in DOMAINS} - {"system administration"}

DEPENDENCY_MODULE = """# Dependency Management Task Builder
You are an expert at creating dependency management programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **Version resolution**: Conflicting constraints, semantic version ranges
- **Environment isolation**: Virtual environments, toolchain selection
- **Lock files**: Pinning, reproducible installs, transitive dependencies
- **Package building**: Installing from source, patching broken packages
- **Dependency auditing**: Outdated or vulnerable versions, license checks

**Your Task**
Create a programming task that tests dependency management skills. The task should be:
1. **Challenging to solve** - Requires domain knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a professional might actually face"""


def module_from_source(doc: str, title: str) -> str:
    start = doc.index("{Domain Module: %s}" % title)
    body_start = doc.index(r"\begin{tabular}", start)
    body_start = doc.index("\n", body_start) + 1
    body_end = doc.index(r"\end{tabular}", body_start)
    lines = []
    for raw in doc[body_start:body_end].split("\n"):
        line = raw.strip()
        if line.endswith("\\\\"):
            line = line[:-2].rstrip()
        line = re.sub(r"\\textbf\{(.*)\}$", lambda m: m.group(1), line)
        line = line.replace("\\#", "#")
        lines.append(line)
    text = "\n".join(lines).strip("\n")
    # Bold sub-headings in the table are rendered as markdown bold.
    text = text.replace("\nDomain Focus\n", "\n**Domain Focus**\n").replace("\nYour Task\n", "\n**Your Task**\n")
    assert "\\" not in text, text
    return text


def slug(name: str) -> str:
    return name.replace(" ", "-")


def main() -> None:
    doc = pathlib.Path(sys.argv[1]).read_text()
    modules = {}
    for name, title, _ in DOMAINS:
        modules[name] = DEPENDENCY_MODULE if title is None else module_from_source(doc, title)

    out_dir = ROOT / "data" / "domains"
    out_dir.mkdir(parents=True, exist_ok=True)
    registry = {"domains": []}
    for name, _, skills in DOMAINS:
        (out_dir / (slug(name) + ".md")).write_text(modules[name] + "\n")
        registry["domains"].append({
            "name": name,
            "module_path": "domains/%s.md" % slug(name),
            "skills": skills,
            "image_ref": "termgen/%s:latest" % slug(name),
            "active": name in ACTIVE_BY_DEFAULT,
        })
    (ROOT / "data" / "domains.json").write_text(json.dumps(registry, indent=2) + "\n")

    def cpp_str(s: str) -> str:
        assert ')MOD"' not in s
        return 'R"MOD(' + s + ')MOD"'

    parts = [
        "#pragma once\n\n// Generated by scripts/gen_domain_assets.py; do not edit by hand.\n\n"
        "#include <string_view>\n\nnamespace termgen::assets {\n\n"
        "struct DomainAsset {\n  std::string_view name;\n  std::string_view module_text;\n"
        "  std::string_view image_ref;\n  bool active;\n  const std::string_view* skills;\n  std::size_t skill_count;\n};\n\n"
    ]
    for i, (name, _, skills) in enumerate(DOMAINS):
        parts.append("inline constexpr std::string_view kSkills%d[] = {\n" % i)
        for s in skills:
            parts.append("    %s,\n" % json.dumps(s))
        parts.append("};\n\n")
    parts.append("inline constexpr DomainAsset kDomains[] = {\n")
    for i, (name, _, skills) in enumerate(DOMAINS):
        parts.append("    {%s,\n     %s,\n     %s, %s, kSkills%d, %d},\n" % (
            json.dumps(name), cpp_str(modules[name]), json.dumps("termgen/%s:latest" % slug(name)),
            "true" if name in ACTIVE_BY_DEFAULT else "false", i, len(skills)))
    parts.append("};\n\n}  // namespace termgen::assets\n")
    (ROOT / "include" / "termgen" / "domain_assets.hpp").write_text("".join(parts))


if __name__ == "__main__":
    main()
