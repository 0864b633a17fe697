use serde::{Deserialize, Serialize};

use crate::model::{Provenance, SuiteError, TestCase, TestSuite};

#[derive(Serialize)]
struct SuiteOut<'a> {
    provenance: Provenance,
    suite: &'a [TestCase],
}

#[derive(Deserialize)]
struct SuiteIn {
    #[serde(default)]
    provenance: Option<Provenance>,
    suite: Vec<TestCase>,
}

/// Pretty-printed suite JSON with a trailing newline.
pub fn suite_to_json(suite: &TestSuite) -> String {
    let out = SuiteOut {
        provenance: suite.provenance(),
        suite: suite.cases(),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("suite serializes");
    s.push('\n');
    s
}

/// Reads the suite JSON schema. A missing `provenance` tag reads as
/// [`Provenance::External`]. Every case must pass its shape check.
pub fn parse_suite(text: &str) -> Result<TestSuite, SuiteError> {
    let raw: SuiteIn = serde_json::from_str(text).map_err(|e| SuiteError::Json(e.to_string()))?;
    for c in &raw.suite {
        c.check_shape()?;
    }
    TestSuite::new(raw.provenance.unwrap_or(Provenance::External), raw.suite)
}
