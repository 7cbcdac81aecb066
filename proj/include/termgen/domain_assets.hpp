#pragma once

// Generated by scripts/gen_domain_assets.py; do not edit by hand.

#include <string_view>

namespace termgen::assets {

struct DomainAsset {
  std::string_view name;
  std::string_view module_text;
  std::string_view image_ref;
  bool active;
  const std::string_view* skills;
  std::size_t skill_count;
};

inline constexpr std::string_view kSkills0[] = {
    "Build transformation pipelines with interpolation and feature extraction",
    "Convert between CSV, JSON Lines, and Parquet with schema enforcement",
    "Deduplicate and merge records from multiple sources",
    "Normalize and extract fields from messy free text with regular expressions",
    "Stream-process files too large to fit in memory",
    "Compute rolling statistics and normalization over grouped data",
    "Resample and align irregular time series",
    "Chain shell tools (awk, sed, sort, jq) into an ETL pipeline",
    "Validate outputs against a schema and report offending rows",
};

inline constexpr std::string_view kSkills1[] = {
    "Writing queries using the formal syntax of declarative query languages for structured data",
    "Compose SQL with joins, window functions, and common table expressions",
    "Infer schema and relationships from an unfamiliar database",
    "Answer path and neighborhood queries over graph-structured data",
    "Paginate, aggregate, and export query results in a required format",
    "Create indexes and compare execution plans to speed up slow queries",
};

inline constexpr std::string_view kSkills2[] = {
    "Load and transform tabular data with groupby, filtering, and aggregation",
    "Build reproducible analysis scripts runnable from the command line",
    "Impute missing values and encode categorical features",
    "Implement clustering or anomaly detection from scratch",
    "Fit regression models and run hypothesis tests with correct statistics",
    "Validate model metrics on held-out data with fixed random seeds",
    "Anonymize personally identifiable fields before analysis",
};

inline constexpr std::string_view kSkills3[] = {
    "Resolve package dependency conflicts through constraint analysis",
    "Diagnose crashing services from logs, exit codes, and core dumps",
    "Bisect a regression across revisions to find the breaking change",
    "Reproduce intermittent failures with a deterministic test case",
    "Fix off-by-one and boundary errors in algorithmic code",
    "Trace corrupted records through a multi-stage data pipeline",
    "Correct numerical instability and floating-point precision bugs",
};

inline constexpr std::string_view kSkills4[] = {
    "Resolve package dependency conflicts through constraint analysis",
    "Pin and lock transitive dependency versions reproducibly",
    "Build isolated virtual environments for conflicting toolchains",
    "Vendor or patch a broken upstream package",
    "Audit installed packages for known-vulnerable versions",
    "Compute minimal upgrade sets that satisfy semantic version ranges",
};

inline constexpr std::string_view kSkills5[] = {
    "Parse structured formats (JSON/XML/CSV) with encoding and validation",
    "Read and write binary files with fixed-width records and seeking",
    "Traverse directory trees with filters on size, age, and permissions",
    "Detect and convert text encodings and line endings",
    "Rename and reorganize files according to metadata-driven rules",
    "Create, inspect, and selectively extract tar, zip, and gzip archives",
    "Reclaim disk space by deduplicating files via hashes and hard links",
    "Download remote files, verify their checksums, and mirror them locally",
};

inline constexpr std::string_view kSkills6[] = {
    "Computing distance metrics between discrete probability distributions",
    "Parse instrument or simulation output files into analysis-ready arrays",
    "Implement numerical integration or ODE solvers with error control",
    "Apply FFT-based filtering and spectral analysis to signals",
    "Run parameter sweeps as batch jobs and collect the results",
    "Verify numerical results against analytic solutions within tolerances",
    "Estimate parameters with Monte Carlo sampling and report confidence intervals",
    "Verify the integrity of downloaded datasets with checksums",
};

inline constexpr std::string_view kSkills7[] = {
    "Craft exploit payloads to bypass authentication and identify vulnerabilities",
    "Audit file permissions and setuid binaries for privilege-escalation paths",
    "Parse and correlate authentication logs to reconstruct an intrusion timeline",
    "Validate and forge signed session tokens to test authentication logic",
    "Recover keys or plaintext from weak or misused cryptographic constructions",
    "Write verification scripts that confirm a vulnerability is patched",
};

inline constexpr std::string_view kSkills8[] = {
    "Implement graph traversal (BFS/DFS) for dependency resolution",
    "Design caching layers with explicit eviction policies",
    "Fix build configurations and linker errors in multi-module projects",
    "Implement a serializer and parser for a custom wire or config format",
    "Build an HTTP API with input validation and authenticated endpoints",
    "Write regression tests that pin down behavior before refactoring",
    "Evaluate semantic version range constraints exactly",
};

inline constexpr std::string_view kSkills9[] = {
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
};

inline constexpr DomainAsset kDomains[] = {
    {"data processing",
     R"MOD(# Data Processing Task Builder
You are an expert at creating data processing programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **File format handling**: CSV, JSON, XML, Parquet, binary formats
- **Data transformation**: Cleaning, normalization, aggregation
- **ETL pipelines**: Extract, transform, load workflows
- **Stream processing**: Real-time data handling
- **Data validation**: Schema enforcement, error handling

**Your Task**
Create a programming task that tests data processing skills. The task should be:
1. **Challenging to solve** - Requires domain knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a professional might actually face)MOD",
     "termgen/data-processing:latest", true, kSkills0, 9},
    {"data querying",
     R"MOD(# Data Querying Task Builder
You are an expert at creating data querying programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **SQL operations**: Complex joins, window functions, CTEs
- **Query optimization**: Indexes, execution plans, performance
- **Database operations**: Schema design, migrations, constraints
- **NoSQL patterns**: Document, key-value, graph queries
- **Data retrieval**: Pagination, filtering, full-text search

**Your Task**
Create a programming task that tests data querying skills. The task should be:
1. **Challenging to solve** - Requires domain knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a professional might actually face)MOD",
     "termgen/data-querying:latest", true, kSkills1, 6},
    {"data science",
     R"MOD(# Data Science Task Builder
You are an expert at creating data science programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **Exploratory Analysis**: Statistical summaries, visualization, pattern discovery
- **Feature Engineering**: Transformation, encoding, selection, creation
- **Statistical Modeling**: Regression, hypothesis testing, Bayesian analysis
- **Data Mining**: Clustering, association rules, anomaly detection
- **Reporting**: Automated insights, metric computation, summary generation

**Your Task**
Create a programming task that tests data science skills. The task should be:
1. **Challenging to solve** - Requires statistical thinking and data intuition
2. **Easy to verify** - Success can be determined by checking outputs or metrics
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a data scientist might actually face)MOD",
     "termgen/data-science:latest", true, kSkills2, 7},
    {"debugging",
     R"MOD(# Debugging Task Builder
You are an expert at creating debugging programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **Error diagnosis**: Stack traces, logs, error messages
- **Root cause analysis**: Bisection, delta debugging
- **Performance debugging**: Profiling, bottleneck identification
- **Memory issues**: Leaks, corruption, allocation problems
- **Concurrency bugs**: Race conditions, deadlocks, livelocks

**Your Task**
Create a programming task that tests debugging skills. The task should be:
1. **Challenging to solve** - Requires domain knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a professional might actually face)MOD",
     "termgen/debugging:latest", true, kSkills3, 7},
    {"dependency management",
     R"MOD(# Dependency Management Task Builder
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
4. **Realistic** - Resembles tasks a professional might actually face)MOD",
     "termgen/dependency-management:latest", true, kSkills4, 6},
    {"file operations",
     R"MOD(# File Operations Task Builder
You are an expert at creating file operations programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **File I/O**: Reading, writing, appending, seeking
- **Directory operations**: Traversal, creation, permissions
- **File formats**: Binary, text, structured data
- **Compression**: Zip, tar, gzip, custom formats
- **File system operations**: Links, permissions, metadata

**Your Task**
Create a programming task that tests file operations skills. The task should be:
1. **Challenging to solve** - Requires domain knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a professional might actually face)MOD",
     "termgen/file-operations:latest", true, kSkills5, 8},
    {"scientific computing",
     R"MOD(# Scientific Computing Task Builder
You are an expert at creating scientific computing programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **Numerical simulation**: ODEs, PDEs, Monte Carlo
- **Signal processing**: FFT, filtering, spectral analysis
- **Statistical analysis**: Hypothesis testing, regression, sampling
- **Visualization**: Plotting, data exploration
- **Domain-specific**: Physics, biology, chemistry applications

**Your Task**
Create a programming task that tests scientific computing skills. The task should be:
1. **Challenging to solve** - Requires domain knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a professional might actually face)MOD",
     "termgen/scientific-computing:latest", true, kSkills6, 8},
    {"security",
     R"MOD(# Security Task Builder
You are an expert at creating security programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **Cryptography**: Encryption, decryption, key management, hash functions
- **Vulnerability Analysis**: Code review, exploit identification, security auditing
- **Authentication**: Password handling, token validation, session management
- **Network Security**: Protocol analysis, traffic inspection, firewall rules
- **Secure Coding**: Input validation, output encoding, secure defaults

**Your Task**
Create a programming task that tests security skills. The task should be:
1. **Challenging to solve** - Requires security knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a security engineer might actually face)MOD",
     "termgen/security:latest", true, kSkills7, 6},
    {"software engineering",
     R"MOD(# Software Engineering Task Builder
You are an expert at creating software engineering programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **Code quality**: Refactoring, testing, documentation
- **Build systems**: Compilation, linking, packaging
- **Version control**: Git operations, merge conflicts
- **API design**: REST, GraphQL, protocol design
- **Architecture**: Patterns, modularity, scalability

**Your Task**
Create a programming task that tests software engineering skills. The task should be:
1. **Challenging to solve** - Requires domain knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a professional might actually face)MOD",
     "termgen/software-engineering:latest", true, kSkills8, 7},
    {"system administration",
     R"MOD(# System Administration Task Builder
You are an expert at creating system administration programming tasks for AI agent training.

**Domain Focus**
Create tasks involving:
- **Process management**: Services, daemons, scheduling
- **Network configuration**: Routing, firewall, DNS
- **Storage management**: Filesystems, RAID, backups
- **Monitoring**: Logging, alerting, metrics
- **Automation**: Scripts, configuration management

**Your Task**
Create a programming task that tests system administration skills. The task should be:
1. **Challenging to solve** - Requires domain knowledge and analytical thinking
2. **Easy to verify** - Success can be determined by checking outputs or state
3. **Self-contained** - All information needed is in the prompt
4. **Realistic** - Resembles tasks a professional might actually face)MOD",
     "termgen/system-administration:latest", false, kSkills9, 11},
};

}  // namespace termgen::assets
