//! Built-in demonstration corpus.
//!
//! A deterministic generator for the 200-sample corpus checked in at
//! `testdata/mini_corpus.jsonl`: 180 clean functions across fifteen
//! everyday task families and 20 samples that each trip exactly one
//! analyzer rule. The risky identifiers tracked by the vocabulary-leakage
//! diagnostic appear only in the flagged samples, so a model trained on the
//! secure split scores a leakage rate of exactly zero while the unfiltered
//! split scores above it.

use crate::corpus::CodeSample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5EED;
const FAMILY_SIZE: usize = 12;

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[&'a str]) -> &'a str {
    options[rng.random_range(0..options.len())]
}

fn pick_u32(rng: &mut ChaCha8Rng, options: &[u32]) -> u32 {
    options[rng.random_range(0..options.len())]
}

/// Optionally weave the comment into the code as a docstring, so the
/// stripper has real work to do on part of the corpus.
fn with_docstring(rng: &mut ChaCha8Rng, def_line: &str, body: &str, comment: &str) -> String {
    let insert = rng.random_range(0..3) == 0;
    if insert {
        format!("{def_line}\n    \"\"\"{comment}\"\"\"\n{body}")
    } else {
        format!("{def_line}\n{body}")
    }
}

fn clean_sample(rng: &mut ChaCha8Rng, family: usize) -> (String, String) {
    match family {
        0 => {
            let acc = pick(rng, &["result", "output", "pieces"]);
            let modulus = pick_u32(rng, &[256, 65536]);
            let comment = pick(
                rng,
                &[
                    "Encrypts a string with a shift cipher keyed by an integer.",
                    "Encrypts text by shifting each character by the key.",
                    "Applies a toy substitution cipher to a string.",
                ],
            )
            .to_string();
            let body = format!(
                "    {acc} = []\n    for index, ch in enumerate(text):\n        shifted = (ord(ch) + key + index) % {modulus}\n        {acc}.append(chr(shifted))\n    return ''.join({acc})\n"
            );
            (with_docstring(rng, "def encrypt_string(text, key):", &body, &comment), comment)
        }
        1 => {
            let table = pick(rng, &["users", "accounts", "members"]);
            let row = pick(rng, &["row", "record", "hit"]);
            let comment = pick(
                rng,
                &[
                    "Checks whether a username is present in the database.",
                    "Returns True when the given user exists.",
                    "Looks a user up by name with a parameterized query.",
                ],
            )
            .to_string();
            let body = format!(
                "    cursor.execute(\"SELECT 1 FROM {table} WHERE username = ?\", (username,))\n    {row} = cursor.fetchone()\n    return {row} is not None\n"
            );
            (with_docstring(rng, "def user_exists(cursor, username):", &body, &comment), comment)
        }
        2 => {
            let var = pick(rng, &["completed", "proc", "outcome"]);
            let capture = pick(rng, &["True", "False"]);
            let comment = pick(
                rng,
                &[
                    "Runs a command given as an argument list.",
                    "Executes a subprocess and reports its exit code.",
                    "Runs the supplied command without a shell.",
                ],
            )
            .to_string();
            let body = format!(
                "    {var} = subprocess.run(args, capture_output={capture})\n    return {var}.returncode\n"
            );
            let code = format!(
                "import subprocess\n\n{}",
                with_docstring(rng, "def run_command(args):", &body, &comment)
            );
            (code, comment)
        }
        3 => {
            let var = pick(rng, &["value", "parsed", "tree"]);
            let comment = pick(
                rng,
                &[
                    "Evaluates a literal expression string safely.",
                    "Parses a Python literal out of the given expression.",
                    "Evaluates the expression with the literal parser.",
                ],
            )
            .to_string();
            let body = format!(
                "    {var} = ast.literal_eval(expression)\n    return {var}\n"
            );
            let code = format!(
                "import ast\n\n{}",
                with_docstring(rng, "def evaluate_expression(expression):", &body, &comment)
            );
            (code, comment)
        }
        4 => {
            let handle = pick(rng, &["handle", "fp", "source"]);
            let comment = pick(
                rng,
                &[
                    "Deserializes a JSON document from a file.",
                    "Loads structured data from the file at path.",
                    "Reads a JSON file and returns its contents.",
                ],
            )
            .to_string();
            let body = format!(
                "    with open(path) as {handle}:\n        return json.load({handle})\n"
            );
            let code = format!(
                "import json\n\n{}",
                with_docstring(rng, "def load_from_file(path):", &body, &comment)
            );
            (code, comment)
        }
        5 => {
            let timeout = pick_u32(rng, &[5, 10, 30]);
            let var = pick(rng, &["response", "reply"]);
            let comment = pick(
                rng,
                &[
                    "Fetches JSON data from a URL with a bounded timeout.",
                    "Downloads a resource and decodes the JSON body.",
                    "Fetches data over HTTP and parses the response.",
                ],
            )
            .to_string();
            let body = format!(
                "    {var} = requests.get(url, timeout={timeout})\n    {var}.raise_for_status()\n    return {var}.json()\n"
            );
            let code = format!(
                "import requests\n\n{}",
                with_docstring(rng, "def fetch_data(url):", &body, &comment)
            );
            (code, comment)
        }
        6 => {
            let algo = pick(rng, &["sha256", "sha512", "blake2b"]);
            let comment = pick(
                rng,
                &[
                    "Hashes text with a modern digest algorithm.",
                    "Computes a strong hash of the given data.",
                    "Returns a hex digest of the input text.",
                ],
            )
            .to_string();
            let body = format!(
                "    digest = hashlib.{algo}(data.encode('utf-8'))\n    return digest.hexdigest()\n"
            );
            let code = format!(
                "import hashlib\n\n{}",
                with_docstring(rng, "def hash_text(data):", &body, &comment)
            );
            (code, comment)
        }
        7 => {
            let map = pick(rng, &["settings", "options", "values"]);
            let sep = pick(rng, &["=", ":"]);
            let comment = pick(
                rng,
                &[
                    "Parses key value pairs out of a config blob.",
                    "Builds a settings dictionary from configuration text.",
                    "Splits configuration lines into a dictionary.",
                ],
            )
            .to_string();
            let body = format!(
                "    {map} = {{}}\n    for line in text.splitlines():\n        if '{sep}' not in line:\n            continue\n        name, value = line.split('{sep}', 1)\n        {map}[name.strip()] = value.strip()\n    return {map}\n"
            );
            (with_docstring(rng, "def parse_config(text):", &body, &comment), comment)
        }
        8 => {
            let map = pick(rng, &["counts", "totals", "tally"]);
            let comment = pick(
                rng,
                &[
                    "Counts how often each word appears in the text.",
                    "Builds a word frequency table.",
                    "Tallies word occurrences in a string.",
                ],
            )
            .to_string();
            let body = format!(
                "    {map} = {{}}\n    # tally occurrences per token\n    for word in text.split():\n        {map}[word] = {map}.get(word, 0) + 1\n    return {map}\n"
            );
            (with_docstring(rng, "def count_words(text):", &body, &comment), comment)
        }
        9 => {
            let acc = pick(rng, &["kept", "selected", "passing"]);
            let op = pick(rng, &[">=", ">"]);
            let comment = pick(
                rng,
                &[
                    "Filters items below a minimum threshold.",
                    "Keeps only items at or above the cutoff.",
                    "Drops items smaller than the minimum.",
                ],
            )
            .to_string();
            let body = format!(
                "    {acc} = []\n    for item in items:\n        if item {op} minimum:\n            {acc}.append(item)\n    return {acc}\n"
            );
            (with_docstring(rng, "def filter_items(items, minimum):", &body, &comment), comment)
        }
        10 => {
            let out = pick(rng, &["merged", "combined", "union"]);
            let comment = pick(
                rng,
                &[
                    "Merges two dictionaries, preferring the second.",
                    "Combines two dicts into a new one.",
                    "Returns the union of two dictionaries.",
                ],
            )
            .to_string();
            let body = format!(
                "    {out} = dict(base)\n    for name, value in extra.items():\n        {out}[name] = value\n    return {out}\n"
            );
            (with_docstring(rng, "def merge_dicts(base, extra):", &body, &comment), comment)
        }
        11 => {
            let timeout = pick_u32(rng, &[10, 15, 60]);
            let comment = pick(
                rng,
                &[
                    "Posts a JSON payload and returns the status code.",
                    "Sends data to a URL with a request timeout.",
                    "Submits a payload over HTTP.",
                ],
            )
            .to_string();
            let body = format!(
                "    response = requests.post(url, json=payload, timeout={timeout})\n    return response.status_code\n"
            );
            let code = format!(
                "import requests\n\n{}",
                with_docstring(rng, "def send_payload(url, payload):", &body, &comment)
            );
            (code, comment)
        }
        12 => {
            let handle = pick(rng, &["handle", "fp"]);
            let comment = pick(
                rng,
                &[
                    "Reads a file into a list of stripped lines.",
                    "Returns the lines of a file without trailing whitespace.",
                    "Loads a text file line by line.",
                ],
            )
            .to_string();
            let body = format!(
                "    with open(path) as {handle}:\n        lines = [line.rstrip() for line in {handle}]\n    return lines\n"
            );
            (with_docstring(rng, "def read_lines(path):", &body, &comment), comment)
        }
        13 => {
            let fallback = pick(rng, &["0.0", "0"]);
            let comment = pick(
                rng,
                &[
                    "Computes the arithmetic mean of the values.",
                    "Averages a list of numbers, empty lists score zero.",
                    "Returns the mean of the given values.",
                ],
            )
            .to_string();
            let body = format!(
                "    if not values:\n        return {fallback}\n    total = sum(values)\n    return total / len(values)\n"
            );
            (with_docstring(rng, "def compute_average(values):", &body, &comment), comment)
        }
        _ => {
            let indent = pick_u32(rng, &[2, 4]);
            let handle = pick(rng, &["handle", "out"]);
            let comment = pick(
                rng,
                &[
                    "Serializes data to a JSON file.",
                    "Writes the given data out as pretty JSON.",
                    "Saves a structure to disk as JSON.",
                ],
            )
            .to_string();
            let body = format!(
                "    with open(path, 'w') as {handle}:\n        json.dump(data, {handle}, indent={indent})\n"
            );
            let code = format!(
                "import json\n\n{}",
                with_docstring(rng, "def save_to_file(path, data):", &body, &comment)
            );
            (code, comment)
        }
    }
}

fn vulnerable_samples() -> Vec<(String, String)> {
    let mk = |code: &str, comment: &str| (code.to_string(), comment.to_string());
    vec![
        mk(
            "import hashlib\n\ndef hash_text(data):\n    return hashlib.md5(data.encode()).hexdigest()\n",
            "Hashes text for an integrity check.",
        ),
        mk(
            "import hashlib\n\ndef checksum(blob):\n    digest = hashlib.md5(blob).digest()\n    return digest\n",
            "Computes a short checksum of a byte blob.",
        ),
        mk(
            "import hashlib\n\ndef fingerprint(data):\n    return hashlib.sha1(data.encode()).hexdigest()\n",
            "Builds a fingerprint string for cache keys.",
        ),
        mk(
            "def evaluate_expression(expr):\n    return eval(expr)\n",
            "Evaluates the expression supplied by the caller.",
        ),
        mk(
            "def evaluate_expression(expr, env):\n    return eval(expr, env)\n",
            "Evaluates an expression against an environment.",
        ),
        mk(
            "def run_snippet(code):\n    exec(code)\n    return True\n",
            "Runs a short snippet of configuration code.",
        ),
        mk(
            "import pickle\n\ndef load_from_file(filename):\n    with open(filename, 'rb') as f:\n        return pickle.load(f)\n",
            "Deserializes an object from a file.",
        ),
        mk(
            "import pickle\n\ndef decode_blob(blob):\n    return pickle.loads(blob)\n",
            "Decodes a serialized blob into an object.",
        ),
        mk(
            "import marshal\n\ndef load_compiled(path):\n    with open(path, 'rb') as f:\n        return marshal.load(f)\n",
            "Loads a compiled object from disk.",
        ),
        mk(
            "import os\n\ndef run_command(command):\n    return os.system(command)\n",
            "Runs the passed in shell command.",
        ),
        mk(
            "import os\n\ndef run_command(command):\n    stream = os.popen(command)\n    return stream.read()\n",
            "Runs a shell command and captures its output.",
        ),
        mk(
            "import subprocess\n\ndef run_command(command):\n    return subprocess.run(command, shell=True)\n",
            "Runs a command line through the shell.",
        ),
        mk(
            "def user_exists(cursor, username):\n    cursor.execute(\"SELECT 1 FROM users WHERE username = '{0}'\".format(username))\n    return cursor.fetchone() is not None\n",
            "Checks if a user exists in a SQL database given a username.",
        ),
        mk(
            "def find_user(cursor, name):\n    cursor.execute(\"SELECT * FROM users WHERE name = '%s'\" % name)\n    return cursor.fetchall()\n",
            "Finds user rows matching a name.",
        ),
        mk(
            "def delete_user(cursor, name):\n    cursor.execute(f\"DELETE FROM users WHERE name = {name}\")\n    return cursor.rowcount\n",
            "Deletes a user row by name.",
        ),
        mk(
            "import requests\n\ndef fetch_data(url):\n    return requests.get(url).json()\n",
            "Fetches JSON data from a URL.",
        ),
        mk(
            "import requests\n\ndef post_payload(url, payload):\n    return requests.post(url, data=payload)\n",
            "Posts a payload to a URL.",
        ),
        mk(
            "import requests\n\ndef remove_resource(url):\n    return requests.delete(url)\n",
            "Deletes a remote resource over HTTP.",
        ),
        mk(
            "def connect(host):\n    password = \"hunter2\"\n    return open_session(host, password)\n",
            "Connects to a host with stored credentials.",
        ),
        mk(
            "def api_client():\n    return build_client(api_key=\"sk-test-123\")\n",
            "Builds a client for the reporting API.",
        ),
    ]
}

/// The full 200-sample corpus, shuffled deterministically and numbered in
/// file order.
pub fn mini_corpus() -> Vec<CodeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut entries: Vec<(String, String)> = Vec::with_capacity(200);
    for family in 0..15 {
        for _ in 0..FAMILY_SIZE {
            entries.push(clean_sample(&mut rng, family));
        }
    }
    entries.extend(vulnerable_samples());
    entries.shuffle(&mut rng);
    entries
        .into_iter()
        .enumerate()
        .map(|(i, (code, comment))| CodeSample {
            id: format!("sample-{:03}", i + 1),
            code,
            comment,
        })
        .collect()
}

/// The corpus rendered as JSONL, one sample per line.
pub fn mini_corpus_jsonl() -> String {
    let mut out = String::new();
    for sample in mini_corpus() {
        out.push_str(&serde_json::to_string(&sample).expect("sample serialization cannot fail"));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
