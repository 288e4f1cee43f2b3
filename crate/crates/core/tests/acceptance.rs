//! Release gate: every project-level guarantee checked end to end, printing
//! one verdict line per criterion. Runs without the libtest harness so the
//! lines are always visible; any failing criterion fails the whole target.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use codesieve::corpus::{read_samples_jsonl, CurationOutput};
use codesieve::eval::{judge_sample, Correctness, EvalConfig, SecurityVerdict};
use codesieve::ngram::DEFAULT_BANNED;
use codesieve::{
    analyze, catalog_default, curate, parse, run_suite, strip, tokenize, tokens_equivalent,
    CurateConfig, NgramModel, PromptCase, SamplerConfig,
};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/mini_corpus.jsonl");
const SUITE: &str = include_str!("../testdata/prompts.json");

enum Verdict {
    Pass(String),
    Skip(String),
    Fail(String),
}

fn main() {
    let checks: [(&str, fn() -> Verdict); 9] = [
        ("strip fidelity", strip_fidelity),
        ("rule fixtures", rule_fixtures),
        ("seeded curation", seeded_curation),
        ("shard prevalence", shard_prevalence),
        ("closed vocabulary", closed_vocabulary),
        ("sampler determinism", sampler_determinism),
        ("golden verdicts", golden_verdicts),
        ("sampling statistics", sampling_statistics),
        ("compare reproducibility", compare_reproducibility),
    ];

    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let verdict = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(v) => v,
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| payload.downcast_ref::<&str>().copied())
                    .unwrap_or("panic");
                Verdict::Fail(msg.to_string())
            }
        };
        let n = i + 1;
        match verdict {
            Verdict::Pass(detail) => println!("criterion {n} PASS {name}: {detail}"),
            Verdict::Skip(detail) => println!("criterion {n} SKIPPED(advisory) {name}: {detail}"),
            Verdict::Fail(detail) => {
                failures += 1;
                println!("criterion {n} FAIL {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}

fn corpus_samples() -> Vec<codesieve::CodeSample> {
    read_samples_jsonl(Path::new(CORPUS)).expect("bundled corpus reads")
}

fn curated() -> CurationOutput {
    curate(corpus_samples(), 0, &CurateConfig::default())
}

fn suite_cases() -> Vec<PromptCase> {
    serde_json::from_str(SUITE).expect("bundled suite parses")
}

fn banned_tokens() -> Vec<String> {
    DEFAULT_BANNED.iter().map(|t| t.to_string()).collect()
}

// ---------------------------------------------------------------------------
// 1: strip fidelity over at least 1,000 valid functions
// ---------------------------------------------------------------------------

fn strip_fidelity() -> Verdict {
    let start = Instant::now();
    let mut sources: Vec<String> = corpus_samples().into_iter().map(|s| s.code).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    for i in 0..900 {
        sources.push(synth_function(&mut rng, i));
    }
    let total = sources.len();
    assert!(total >= 1000, "need at least 1,000 functions, have {total}");

    for (i, src) in sources.iter().enumerate() {
        let stripped = strip(src).unwrap_or_else(|e| panic!("sample {i}: strip failed: {e}"));
        tokenize(&stripped).unwrap_or_else(|e| panic!("sample {i}: output does not lex: {e}"));
        parse(&stripped).unwrap_or_else(|e| panic!("sample {i}: output does not parse: {e}"));
        let again = strip(&stripped).unwrap_or_else(|e| panic!("sample {i}: re-strip failed: {e}"));
        assert_eq!(again, stripped, "sample {i}: strip is not idempotent");
        assert!(tokens_equivalent(src, &stripped), "sample {i}: token sequences diverge");
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget is 10s");
    Verdict::Pass(format!(
        "{total} functions lex, parse, re-strip identically, and match token-for-token ({:.2}s)",
        elapsed.as_secs_f64()
    ))
}

/// One syntactically valid function assembled from closed statement
/// templates. Each template is valid on its own and composition only ever
/// appends whole statements under the def, so validity holds by
/// construction.
fn synth_function(rng: &mut ChaCha8Rng, i: usize) -> String {
    let mut out = String::new();
    if rng.random_range(0..6) == 0 {
        out.push_str("@cached\n");
    }
    out.push_str(&format!("def fn_{i}(a, b=2):\n"));
    match rng.random_range(0..4) {
        0 => out.push_str("    \"\"\"Collapse the pair into one value.\"\"\"\n"),
        1 => out.push_str("    '''doc'''\n"),
        2 => out.push_str("    # fold both arguments together\n"),
        _ => {}
    }
    for _ in 0..rng.random_range(1..=4) {
        let n: u32 = rng.random_range(0..100);
        match rng.random_range(0..13) {
            0 => out.push_str(&format!("    x = {n}\n")),
            1 => out.push_str(&format!("    y = a + {n}  # offset\n")),
            2 => out.push_str("    if a:\n        return b\n"),
            3 => out.push_str(&format!(
                "    if a > {n}:\n        b = a * 2\n    else:\n        b = 0\n"
            )),
            4 => out.push_str("    for item in a:\n        total = item + b\n"),
            5 => out.push_str("    while b:\n        b = b - 1\n        break\n"),
            6 => {
                out.push_str("    try:\n        x = int(a)\n    except ValueError:\n        x = 0\n")
            }
            7 => out.push_str("    with open(a) as f:\n        data = f.read()\n"),
            8 => out.push_str("    items = [v for v in a if v]\n"),
            9 => out.push_str(&format!("    table = {{'k': a, 'n': {n}}}\n")),
            10 => out.push_str("    msg = f'got {a}'\n"),
            11 => out.push_str("    def inner(v):\n        return v + 1\n    return inner(a)\n"),
            _ => out.push_str("    if not a: return None\n"),
        }
    }
    if rng.random_range(0..2) == 0 {
        out.push_str("    return b\n");
    }
    out
}

// ---------------------------------------------------------------------------
// 2: per-rule fixture suite, zero misclassifications
// ---------------------------------------------------------------------------

/// The two recorded query-construction forms the analyzer must split on:
/// string formatting flags as injection, placeholders stay quiet.
const SQL_FORMAT_QUERY: &str = "def user_exists(self, username):\n    if not self.db_connection.cursor().execute(\n        \"SELECT username, password FROM user \"\n        \"WHERE username = '{0}'\".format(username)):\n        return False\n    return True\n";
const SQL_PARAM_QUERY: &str = "def user_exists(self, username):\n    self.connection.cursor().execute(\n        \"SELECT username, password FROM users \"\n        \"WHERE username = ?\", (username))\n    return True\n";

struct RuleFixture {
    rule: &'static str,
    positives: [&'static str; 3],
    negatives: [&'static str; 3],
}

const RULE_FIXTURES: [RuleFixture; 7] = [
    RuleFixture {
        rule: "WEAK-HASH",
        positives: [
            "import hashlib\nh = hashlib.md5(data)\n",
            "import hashlib\ndigest = hashlib.sha1(text.encode()).hexdigest()\n",
            "from hashlib import md5\nchecksum = md5(payload)\n",
        ],
        negatives: [
            "import hashlib\nh = hashlib.sha256(data)\n",
            "import hashlib\nh = hashlib.blake2b(data)\n",
            "checksum = md5(payload)\n",
        ],
    },
    RuleFixture {
        rule: "EVAL-USE",
        positives: [
            "result = eval(expression)\n",
            "exec(code)\n",
            "value = eval(user_input, {}, {})\n",
        ],
        negatives: [
            "import ast\nvalue = ast.literal_eval(expression)\n",
            "result = engine.eval(expression)\n",
            "evaluate(expression)\n",
        ],
    },
    RuleFixture {
        rule: "UNSAFE-DESERIAL",
        positives: [
            "import pickle\nobj = pickle.load(f)\n",
            "import marshal\ncode = marshal.loads(blob)\n",
            "import yaml\ncfg = yaml.load(stream)\n",
        ],
        negatives: [
            "import json\nobj = json.load(f)\n",
            "import yaml\ncfg = yaml.safe_load(stream)\n",
            "import json\nitems = json.loads(payload)\n",
        ],
    },
    RuleFixture {
        rule: "SHELL-INJECT",
        positives: [
            "import os\nos.system('rm -rf ' + target)\n",
            "import os\nout = os.popen(cmd).read()\n",
            "import subprocess\nsubprocess.run(command, shell=True)\n",
        ],
        negatives: [
            "import subprocess\nsubprocess.run(args, check=True)\n",
            "import subprocess\nsubprocess.call(cmd, shell=False)\n",
            "import os\nos.system('ls -l')\n",
        ],
    },
    RuleFixture {
        rule: "SQL-INJECT",
        positives: [
            SQL_FORMAT_QUERY,
            "cursor.execute('SELECT * FROM t WHERE id = %s' % user_id)\n",
            "cursor.execute(f'SELECT * FROM t WHERE name = {name}')\n",
        ],
        negatives: [
            SQL_PARAM_QUERY,
            "cursor.execute('SELECT * FROM t WHERE id = ?', (user_id,))\n",
            "cursor.execute(query)\n",
        ],
    },
    RuleFixture {
        rule: "HARDCODED-CRED",
        positives: [
            "password = 'hunter2'\n",
            "self.api_key = 'abc123'\n",
            "client = connect(host, password='p4ss')\n",
        ],
        negatives: [
            "password = os.environ['DB_PASSWORD']\n",
            "token = read_token(path)\n",
            "password = ''\n",
        ],
    },
    RuleFixture {
        rule: "NO-TIMEOUT",
        positives: [
            "import requests\nr = requests.get(url)\n",
            "import requests\nr = requests.post(url, data=payload)\n",
            "import requests\nrequests.delete(url)\n",
        ],
        negatives: [
            "import requests\nr = requests.get(url, timeout=5)\n",
            "import requests\nr = requests.post(url, data=payload, timeout=(3, 10))\n",
            "import requests\nsession.get(url)\n",
        ],
    },
];

fn rule_fixtures() -> Verdict {
    let rules = catalog_default();
    let mut cases = 0;
    let mut bad = Vec::new();
    for fixture in &RULE_FIXTURES {
        for (k, src) in fixture.positives.iter().enumerate() {
            cases += 1;
            let findings = analyze(src, &rules);
            let hit = findings.iter().any(|f| f.rule_id == fixture.rule);
            let stray = findings.iter().any(|f| f.rule_id != fixture.rule);
            if !hit || stray {
                bad.push(format!("{} positive {k}: {findings:?}", fixture.rule));
            }
        }
        for (k, src) in fixture.negatives.iter().enumerate() {
            cases += 1;
            let findings = analyze(src, &rules);
            if !findings.is_empty() {
                bad.push(format!("{} negative {k}: {findings:?}", fixture.rule));
            }
        }
    }
    if bad.is_empty() {
        Verdict::Pass(format!(
            "{cases} fixtures (3 firing / 3 quiet per rule, query forms included), 0 misclassified"
        ))
    } else {
        Verdict::Fail(bad.join("; "))
    }
}

// ---------------------------------------------------------------------------
// 3: curation of the seeded 200-sample corpus
// ---------------------------------------------------------------------------

fn seeded_curation() -> Verdict {
    let out = curated();
    assert_eq!(out.all.len(), 200, "all split size");
    assert_eq!(out.secure.len(), 180, "secure split size");
    assert_eq!(out.findings.len(), 20, "findings records");
    assert_eq!(out.report.flagged, 20, "flagged count");
    assert_eq!(out.report.parse_failures, 0, "parse failures");

    let rules = catalog_default();
    for sample in &out.secure {
        let findings = analyze(&sample.code, &rules);
        assert!(findings.is_empty(), "{}: secure sample re-analyzes dirty: {findings:?}", sample.id);
    }
    Verdict::Pass("200 in, 180 secure, 20 flagged; the secure split re-analyzes to 0 findings".into())
}

// ---------------------------------------------------------------------------
// 4: full-scale shard prevalence (advisory only in this environment)
// ---------------------------------------------------------------------------

fn shard_prevalence() -> Verdict {
    Verdict::Skip(
        "no full-scale corpus shard or external reference analyzer is available here; \
         the mandatory substitutes are the rule fixtures (criterion 2) and the seeded \
         curation run (criterion 3)"
            .into(),
    )
}

// ---------------------------------------------------------------------------
// 5: closed vocabulary of the secure-trained model
// ---------------------------------------------------------------------------

fn closed_vocabulary() -> Verdict {
    let out = curated();
    let all_codes: Vec<String> = out.all.iter().map(|s| s.code.clone()).collect();
    let secure_codes: Vec<String> = out.secure.iter().map(|s| s.code.clone()).collect();
    let model_all = NgramModel::train(&all_codes, 3, "all").expect("all model trains");
    let model_secure = NgramModel::train(&secure_codes, 3, "secure").expect("secure model trains");

    let banned = banned_tokens();
    let rate_all = model_all.banned_token_rate(&banned);
    let rate_secure = model_secure.banned_token_rate(&banned);
    assert!(rate_all > 0.0, "all-trained model should carry banned tokens, rate {rate_all}");
    assert_eq!(rate_secure, 0.0, "secure-trained model vocabulary leaks banned tokens");

    let cases = suite_cases();
    let cfg = EvalConfig::default();
    let report_all = run_suite(&model_all, &cases, &cfg);
    let report_secure = run_suite(&model_secure, &cases, &cfg);
    let (ns_all, ns_secure) = (report_all.summary.not_secure, report_secure.summary.not_secure);
    assert!(
        ns_secure <= ns_all,
        "secure model produced more insecure runs ({ns_secure}) than the all model ({ns_all})"
    );
    Verdict::Pass(format!(
        "banned-token rate {rate_all:.4} (all) vs {rate_secure:.4} (secure); \
         insecure eval runs {ns_all} (all) vs {ns_secure} (secure)"
    ))
}

// ---------------------------------------------------------------------------
// 6: sampler determinism across temperature regimes
// ---------------------------------------------------------------------------

fn sampler_determinism() -> Verdict {
    let out = curated();
    let all_codes: Vec<String> = out.all.iter().map(|s| s.code.clone()).collect();
    let model = NgramModel::train(&all_codes, 3, "all").expect("model trains");
    let prompts: Vec<String> = suite_cases().into_iter().map(|c| c.prompt).collect();

    for prompt in &prompts {
        let mut outputs = BTreeSet::new();
        for seed in [1u64, 99, 12345] {
            let cfg = SamplerConfig { seed, temperature: 0.0, max_tokens: 128 };
            outputs.insert(model.generate(prompt, &cfg));
        }
        assert_eq!(outputs.len(), 1, "greedy decoding diverged for prompt {prompt:?}");
    }

    let mut any_diverged = false;
    for prompt in &prompts {
        let mut outputs = BTreeSet::new();
        for seed in [11u64, 12, 13] {
            let cfg = SamplerConfig { seed, temperature: 1.0, max_tokens: 128 };
            outputs.insert(model.generate(prompt, &cfg));
        }
        if outputs.len() >= 2 {
            any_diverged = true;
        }
    }
    assert!(any_diverged, "sampling at temperature 1.0 never diverged across seeds");
    Verdict::Pass(
        "temperature 0 is seed-invariant on every prompt; temperature 1 diverges across seeds"
            .into(),
    )
}

// ---------------------------------------------------------------------------
// 7: golden verdicts on the six bundled listings
// ---------------------------------------------------------------------------

fn golden_verdicts() -> Verdict {
    let table = [
        (
            "deser_all",
            include_str!("../testdata/golden/deser_all.py"),
            "UNSAFE-DESERIAL",
            Correctness::Correct,
            SecurityVerdict::Secure,
        ),
        (
            "deser_secure",
            include_str!("../testdata/golden/deser_secure.py"),
            "UNSAFE-DESERIAL",
            Correctness::Correct,
            SecurityVerdict::Secure,
        ),
        (
            "sql_all",
            include_str!("../testdata/golden/sql_all.py"),
            "SQL-INJECT",
            Correctness::Correctable,
            SecurityVerdict::NotSecure,
        ),
        (
            "sql_secure",
            include_str!("../testdata/golden/sql_secure.py"),
            "SQL-INJECT",
            Correctness::Correctable,
            SecurityVerdict::Secure,
        ),
        (
            "shell_all",
            include_str!("../testdata/golden/shell_all.py"),
            "SHELL-INJECT",
            Correctness::Incorrect,
            SecurityVerdict::NotApplicable,
        ),
        (
            "encrypt_all",
            include_str!("../testdata/golden/encrypt_all.py"),
            "WEAK-HASH",
            Correctness::Incorrect,
            SecurityVerdict::NotApplicable,
        ),
    ];
    for (name, source, rule, want_correctness, want_security) in table {
        let (judgement, security, findings) = judge_sample(source, &[rule.to_string()]);
        assert_eq!(
            judgement.verdict, want_correctness,
            "{name}: correctness cell (findings {findings:?})"
        );
        assert_eq!(security, want_security, "{name}: security cell (findings {findings:?})");
    }
    Verdict::Pass("all six correctness and security cells match the recorded table".into())
}

// ---------------------------------------------------------------------------
// 8: sampling statistics and per-step normalization
// ---------------------------------------------------------------------------

fn sampling_statistics() -> Verdict {
    let uniform = NgramModel::train(&["a".to_string(), "b".to_string()], 2, "uniform")
        .expect("two-token model trains");
    let draws = 10_000usize;
    let mut a_count = 0usize;
    for seed in 0..draws as u64 {
        let cfg = SamplerConfig { seed, temperature: 1.0, max_tokens: 8 };
        let text = uniform.generate("", &cfg);
        match text.as_str() {
            "a\n" => a_count += 1,
            "b\n" => {}
            other => panic!("unexpected sample {other:?}"),
        }
    }
    let freq = a_count as f64 / draws as f64;
    assert!((freq - 0.5).abs() <= 0.02, "token frequency {freq} drifts past 0.5 +/- 0.02");

    let out = curated();
    let secure_codes: Vec<String> = out.secure.iter().map(|s| s.code.clone()).collect();
    let model = NgramModel::train(&secure_codes, 3, "secure").expect("model trains");
    let vocab: Vec<String> = model.vocabulary().iter().map(|t| t.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0421);
    let mut worst = 0.0f64;
    for _ in 0..1_000 {
        let len = rng.random_range(0..=3);
        let context: Vec<String> =
            (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect();
        let temperature = rng.random_range(0.05..2.5);
        let dist = model.next_distribution(&context, temperature);
        assert!(!dist.is_empty(), "distribution backed off to nothing for {context:?}");
        let sum: f64 = dist.iter().map(|(_, p)| p).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    assert!(worst < 1e-9, "probability mass drifted by {worst:e}");
    Verdict::Pass(format!(
        "uniform two-token frequency {freq:.4} over {draws} draws; \
         1,000 random contexts normalize within {worst:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// 9: byte-identical compare runs
// ---------------------------------------------------------------------------

const COMPARE_ARTIFACTS: [&str; 10] = [
    "all.jsonl",
    "secure.jsonl",
    "findings.jsonl",
    "report.json",
    "model_all.bin",
    "model_secure.bin",
    "eval_all.json",
    "eval_secure.json",
    "compare.json",
    "compare.txt",
];

fn compare_reproducibility() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_codesieve");
    let tmp = tempfile::tempdir().expect("tempdir");
    let dir_a = tmp.path().join("run_a");
    let dir_b = tmp.path().join("run_b");
    for dir in [&dir_a, &dir_b] {
        let output = Command::new(bin)
            .args(["compare", "--in", CORPUS, "--out-dir"])
            .arg(dir)
            .args(["--seed", "7", "--order", "3", "--repeats", "3"])
            .output()
            .expect("compare runs");
        assert!(
            output.status.success(),
            "compare failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    for name in COMPARE_ARTIFACTS {
        let a = std::fs::read(dir_a.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let b = std::fs::read(dir_b.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!a.is_empty(), "{name} is empty");
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    Verdict::Pass(format!("{} artifacts byte-identical across two runs", COMPARE_ARTIFACTS.len()))
}
