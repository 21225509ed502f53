//! JSON and CSV interchange formats.
//!
//! Every floating-point value is written with 17 significant digits so a
//! reload reproduces the exact `f64`.

use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{SimilarityStudyResult, THETA_MARGIN};
use crate::error::{Error, Result};
use crate::loop_model::{LoopPass, NestedLoopProgram, SwitchSetting};
use crate::matrices::ComplexMatrix;
use crate::sampler::{OccupationConfiguration, ProbabilityTable, TableEntry};

/// Decimal rendering with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact JSON formatter that prints floats through [`fmt17`].
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serialises `value` as one line of JSON followed by a newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialisation cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::validation(format!("malformed {what} JSON: {e}")))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryJson {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// `{"n": .., "re": [[..]], "im": [[..]]}`; panics on a non-square matrix.
pub fn unitary_to_json(m: &ComplexMatrix) -> String {
    assert!(m.is_square(), "unitary JSON holds square matrices only");
    to_json_string(&UnitaryJson {
        n: m.rows(),
        re: m.re_rows(),
        im: m.im_rows(),
    })
}

/// Parses the unitary format; unitarity is left to the caller.
pub fn unitary_from_json(text: &str) -> Result<ComplexMatrix> {
    let raw: UnitaryJson = parse_json(text, "unitary")?;
    let m = ComplexMatrix::from_parts(&raw.re, &raw.im)?;
    if m.rows() != raw.n || m.cols() != raw.n {
        return Err(Error::validation(format!(
            "declared n = {} but the matrix is {}x{}",
            raw.n,
            m.rows(),
            m.cols()
        )));
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SettingJson {
    t: usize,
    theta: f64,
    phi: f64,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PassJson {
    settings: Vec<SettingJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramJson {
    n: usize,
    #[serde(default)]
    tau_seconds: Option<f64>,
    passes: Vec<PassJson>,
}

pub fn program_to_json(prog: &NestedLoopProgram) -> String {
    let passes = prog
        .passes()
        .iter()
        .map(|pass| PassJson {
            settings: pass
                .settings()
                .iter()
                .enumerate()
                .map(|(e, s)| SettingJson {
                    t: e + 1,
                    theta: s.theta(),
                    phi: s.phi(),
                    lambda: s.lam(),
                })
                .collect(),
        })
        .collect();
    to_json_string(&ProgramJson {
        n: prog.n(),
        tau_seconds: prog.tau_seconds(),
        passes,
    })
}

/// Parses the program format. Each pass must list every event
/// `t = 1..=n+1` exactly once (in any order) and keep both boundary events
/// completely reflective.
pub fn program_from_json(text: &str) -> Result<NestedLoopProgram> {
    let raw: ProgramJson = parse_json(text, "program")?;
    let n = raw.n;
    let mut passes = Vec::with_capacity(raw.passes.len());
    for (k, pass) in raw.passes.into_iter().enumerate() {
        let mut slots: Vec<Option<SwitchSetting>> = vec![None; pass.settings.len().max(n + 1)];
        for s in pass.settings {
            if s.t == 0 || s.t > slots.len() {
                return Err(Error::validation(format!(
                    "pass {k}: switch event t={} out of range",
                    s.t
                )));
            }
            if slots[s.t - 1].is_some() {
                return Err(Error::validation(format!(
                    "pass {k}: switch event t={} given twice",
                    s.t
                )));
            }
            slots[s.t - 1] = Some(SwitchSetting::new(s.theta, s.phi, s.lambda)?);
        }
        let settings = slots
            .into_iter()
            .enumerate()
            .map(|(e, s)| s.ok_or_else(|| Error::validation(format!("pass {k}: switch event t={} missing", e + 1))))
            .collect::<Result<Vec<_>>>()?;
        if settings.len() != n + 1 {
            return Err(Error::validation(format!(
                "pass {k} has {} switch events but the program has {n} bins",
                settings.len()
            )));
        }
        passes.push(LoopPass::new(n, settings).map_err(|e| match e {
            Error::Validation(msg) => Error::validation(format!("pass {k}: {msg}")),
            other => other,
        })?);
    }
    NestedLoopProgram::new(n, passes)?.with_tau(raw.tau_seconds)
}

fn csv_error(e: csv::Error) -> Error {
    Error::validation(format!("CSV error: {e}"))
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory CSV flush cannot fail");
    String::from_utf8(bytes).expect("CSV fields are UTF-8")
}

pub const DISTRIBUTION_HEADER: [&str; 4] = ["configuration", "amplitude_re", "amplitude_im", "probability"];

pub fn distribution_to_csv(table: &ProbabilityTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DISTRIBUTION_HEADER).expect("in-memory write");
    for e in table.entries() {
        w.write_record([
            e.configuration.to_string(),
            fmt17(e.amplitude.re),
            fmt17(e.amplitude.im),
            fmt17(e.probability),
        ])
        .expect("in-memory write");
    }
    into_string(w)
}

pub fn distribution_from_csv(text: &str) -> Result<ProbabilityTable> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(DISTRIBUTION_HEADER) {
        return Err(Error::validation(format!("unexpected distribution header {header:?}")));
    }
    let mut entries = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let num = |i: usize| -> Result<f64> {
            record[i]
                .parse()
                .map_err(|_| Error::validation(format!("bad number {:?}", &record[i])))
        };
        entries.push(TableEntry {
            configuration: record[0].parse()?,
            amplitude: Complex64::new(num(1)?, num(2)?),
            probability: num(3)?,
        });
    }
    ProbabilityTable::from_entries(entries)
}

/// One configuration per line, no header.
pub fn samples_to_csv(samples: &[OccupationConfiguration]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

pub fn samples_from_csv(text: &str) -> Result<Vec<OccupationConfiguration>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(str::parse).collect()
}

/// `n,m,trials,seed,best_s,theta_1,…,theta_m` plus one data row.
pub fn similarity_study_to_csv(res: &SimilarityStudyResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["n", "m", "trials", "seed", "best_s"].map(String::from).to_vec();
    header.extend((1..=res.best_thetas.len()).map(|k| format!("theta_{k}")));
    w.write_record(&header).expect("in-memory write");
    let mut row = vec![
        res.n.to_string(),
        res.m.to_string(),
        res.trials.to_string(),
        res.seed.to_string(),
        fmt17(res.best_s),
    ];
    row.extend(res.best_thetas.iter().map(|&t| fmt17(t)));
    w.write_record(&row).expect("in-memory write");
    into_string(w)
}

pub fn similarity_study_from_csv(text: &str) -> Result<SimilarityStudyResult> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    let record = r
        .records()
        .next()
        .ok_or_else(|| Error::validation("similarity CSV has no data row"))?
        .map_err(csv_error)?;
    let field = |name: &str| -> Result<&str> {
        header
            .iter()
            .position(|h| h == name)
            .and_then(|i| record.get(i))
            .ok_or_else(|| Error::validation(format!("missing column {name}")))
    };
    let bad = |name: &str| Error::validation(format!("bad value in column {name}"));
    let m: usize = field("m")?.parse().map_err(|_| bad("m"))?;
    let best_thetas = (1..=m)
        .map(|k| {
            let col = format!("theta_{k}");
            field(&col)?.parse::<f64>().map_err(|_| bad(&col))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityStudyResult {
        n: field("n")?.parse().map_err(|_| bad("n"))?,
        m,
        trials: field("trials")?.parse().map_err(|_| bad("trials"))?,
        seed: field("seed")?.parse().map_err(|_| bad("seed"))?,
        best_s: field("best_s")?.parse().map_err(|_| bad("best_s"))?,
        best_thetas,
        theta_range: (THETA_MARGIN, std::f64::consts::FRAC_PI_2 - THETA_MARGIN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::monte_carlo_max_similarity;
    use crate::compiler::{compile_unitary, Strategy};
    use crate::matrices::haar_random_unitary;
    use crate::sampler::output_distribution;
    use crate::UnitaryMatrix;
    use proptest::prelude::*;

    #[test]
    fn fmt17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, -0.0, std::f64::consts::PI] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt17(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn unitary_json_field_names() {
        let text = unitary_to_json(&ComplexMatrix::identity(2));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["re"][0][0].as_f64(), Some(1.0));
        assert_eq!(v["im"][1][0].as_f64(), Some(0.0));
        assert_eq!(v.as_object().unwrap().len(), 3);
    }

    #[test]
    fn unitary_json_rejects_garbage() {
        assert!(matches!(unitary_from_json("{not json"), Err(Error::Validation(_))));
        assert!(unitary_from_json(r#"{"n":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]],"x":1}"#).is_err());
        assert!(unitary_from_json(r#"{"n":3,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#).is_err());
        assert!(unitary_from_json(r#"{"n":2,"re":[[1,0],[0]],"im":[[0,0],[0,0]]}"#).is_err());
    }

    #[test]
    fn program_json_layout() {
        let u = haar_random_unitary(3, 2).unwrap();
        let prog = compile_unitary(&u, Strategy::PerRotation)
            .unwrap()
            .with_tau(Some(1e-8))
            .unwrap();
        let text = program_to_json(&prog);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["tau_seconds"].as_f64(), Some(1e-8));
        let s0 = &v["passes"][0]["settings"][0];
        assert_eq!(s0["t"], 1);
        for key in ["theta", "phi", "lambda"] {
            assert!(s0[key].is_number());
        }
        assert_eq!(program_from_json(&text).unwrap(), prog);

        let none = program_to_json(&NestedLoopProgram::identity(2).unwrap());
        assert!(none.contains(r#""tau_seconds":null"#));
    }

    #[test]
    fn program_loader_rejects_bad_schedules() {
        let open_window = r#"{"n":2,"tau_seconds":null,"passes":[{"settings":[
            {"t":1,"theta":0.3,"phi":0,"lambda":0},{"t":2,"theta":0,"phi":0,"lambda":0},
            {"t":3,"theta":0,"phi":0,"lambda":0}]}]}"#;
        assert!(matches!(program_from_json(open_window), Err(Error::Validation(_))));

        let gap = r#"{"n":2,"passes":[{"settings":[
            {"t":1,"theta":0,"phi":0,"lambda":0},{"t":3,"theta":0,"phi":0,"lambda":0}]}]}"#;
        assert!(program_from_json(gap).is_err());

        let dup = r#"{"n":1,"passes":[{"settings":[
            {"t":1,"theta":0,"phi":0,"lambda":0},{"t":1,"theta":0,"phi":0,"lambda":0}]}]}"#;
        assert!(program_from_json(dup).is_err());

        let mixed = r#"{"n":1,"passes":[{"settings":[
            {"t":1,"theta":0,"phi":0,"lambda":0},{"t":2,"theta":0,"phi":0,"lambda":0},
            {"t":3,"theta":0,"phi":0,"lambda":0}]}]}"#;
        assert!(program_from_json(mixed).is_err());

        let out_of_order = r#"{"n":1,"passes":[{"settings":[
            {"t":2,"theta":0,"phi":0.5,"lambda":0},{"t":1,"theta":0,"phi":0,"lambda":0}]}]}"#;
        let prog = program_from_json(out_of_order).unwrap();
        assert_eq!(prog.passes()[0].settings()[1].phi(), 0.5);
    }

    #[test]
    fn distribution_csv_layout() {
        let u = haar_random_unitary(3, 9).unwrap();
        let table = output_distribution(&u, &"1 1 0".parse().unwrap()).unwrap();
        let text = distribution_to_csv(&table);
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("configuration,amplitude_re,amplitude_im,probability")
        );
        assert!(lines.next().unwrap().starts_with("0 0 2,"));
        assert_eq!(distribution_from_csv(&text).unwrap(), table);
    }

    #[test]
    fn study_csv_round_trip() {
        let res = monte_carlo_max_similarity(3, 2, 20, 4).unwrap();
        let text = similarity_study_to_csv(&res);
        assert!(text.starts_with("n,m,trials,seed,best_s,theta_1,theta_2\n"));
        assert_eq!(similarity_study_from_csv(&text).unwrap(), res);
    }

    proptest! {
        #[test]
        fn unitary_json_round_trip(n in 1usize..7, seed in any::<u64>()) {
            let u = haar_random_unitary(n, seed).unwrap();
            let back = unitary_from_json(&unitary_to_json(&u)).unwrap();
            prop_assert_eq!(&back, u.matrix());
            prop_assert!(UnitaryMatrix::new(back).is_ok());
        }

        #[test]
        fn program_json_round_trip(n in 2usize..6, seed in any::<u64>(), packed in any::<bool>()) {
            let u = haar_random_unitary(n, seed).unwrap();
            let strategy = if packed { Strategy::Packed } else { Strategy::PerRotation };
            let prog = compile_unitary(&u, strategy).unwrap();
            prop_assert_eq!(program_from_json(&program_to_json(&prog)).unwrap(), prog);
        }

        #[test]
        fn samples_round_trip(counts in proptest::collection::vec(proptest::collection::vec(0usize..5, 3), 0..20)) {
            let samples: Vec<_> = counts.into_iter().map(|c| OccupationConfiguration::new(c).unwrap()).collect();
            prop_assert_eq!(samples_from_csv(&samples_to_csv(&samples)).unwrap(), samples);
        }
    }
}
