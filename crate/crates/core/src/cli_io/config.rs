use serde_json::{json, Map, Value};

use crate::boris::Variant;
use crate::error::{Error, Result};
use crate::field::{PaperToroidal, DEFAULT_B_MIN, DEFAULT_R_MIN};
use crate::harness::{ExperimentSpec, ReferencePolicy, DEFAULT_BUDGET_STEPS, DEFAULT_HORIZON_C};
use crate::vec3::Vec3;

pub const PAPER_PRESET: &str = "paper-toroidal";

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub preset: String,
    pub params: PaperToroidal,
    pub b_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub stride: f64,
}

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub h: f64,
    pub t_final: f64,
    pub variant: Variant,
    pub field: FieldConfig,
    pub x0: Vec3,
    pub v0: Vec3,
    pub output: OutputConfig,
    pub r_min: f64,
    pub budget_steps: u64,
    pub c: f64,
}

struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, path: &str) -> Result<Self> {
        match v {
            Value::Object(map) => Ok(Self {
                path: path.to_string(),
                map,
            }),
            _ => Err(Error::schema(display(path), "expected an object")),
        }
    }

    fn at(&self, key: &str) -> String {
        format!("{}/{}", self.path, key)
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        // serde_json keeps keys sorted, so the first unknown key is deterministic.
        match self.map.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::schema(self.at(k), "unknown key")),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => finite(v, &self.at(key)).map(Some),
        }
    }

    fn req_num(&self, key: &str) -> Result<f64> {
        self.num(key)?
            .ok_or_else(|| Error::schema(self.at(key), "missing required key"))
    }
}

fn display(path: &str) -> String {
    if path.is_empty() {
        "/".to_string()
    } else {
        path.to_string()
    }
}

fn finite(v: &Value, path: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(Error::schema(path, "expected a finite number")),
    }
}

fn vec3(v: Option<&Value>, path: &str) -> Result<Vec3> {
    let v = v.ok_or_else(|| Error::schema(path, "missing required key"))?;
    match v.as_array() {
        Some(a) if a.len() == 3 => Ok(Vec3::new(
            finite(&a[0], &format!("{path}/0"))?,
            finite(&a[1], &format!("{path}/1"))?,
            finite(&a[2], &format!("{path}/2"))?,
        )),
        _ => Err(Error::schema(path, "expected an array of 3 numbers")),
    }
}

fn positive(x: f64, path: &str) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::schema(path, format!("must be > 0, got {x}")))
    }
}

/// Parses and validates a configuration document. Errors carry a JSON-pointer
/// path to the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::schema("/", format!("malformed JSON: {e}")))?;
    let top = Obj::new(&root, "")?;
    top.only(&[
        "epsilon", "h", "t_final", "variant", "field", "x0", "v0", "output", "r_min",
        "budget_steps", "c",
    ])?;

    let epsilon = top.req_num("epsilon")?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::schema("/epsilon", format!("must lie in (0, 1], got {epsilon}")));
    }
    let h = positive(top.req_num("h")?, "/h")?;
    let t_final = top.req_num("t_final")?;
    if t_final < 0.0 {
        return Err(Error::schema("/t_final", format!("must be >= 0, got {t_final}")));
    }
    let variant = match top.get("variant") {
        None => return Err(Error::schema("/variant", "missing required key")),
        Some(Value::String(s)) if s == "standard" => Variant::Standard,
        Some(Value::String(s)) if s == "modified" => Variant::Modified,
        Some(_) => {
            return Err(Error::schema(
                "/variant",
                "expected \"standard\" or \"modified\"",
            ))
        }
    };

    let field_v = top
        .get("field")
        .ok_or_else(|| Error::schema("/field", "missing required key"))?;
    let fo = Obj::new(field_v, "/field")?;
    fo.only(&["preset", "a0", "a1", "a2", "c", "b_min"])?;
    let preset = match fo.get("preset") {
        Some(Value::String(s)) if s == PAPER_PRESET => s.clone(),
        Some(Value::String(s)) => {
            return Err(Error::schema("/field/preset", format!("unknown preset \"{s}\"")))
        }
        Some(_) => return Err(Error::schema("/field/preset", "expected a string")),
        None => return Err(Error::schema("/field/preset", "missing required key")),
    };
    let d = PaperToroidal::PAPER;
    let params = PaperToroidal {
        a0: fo.num("a0")?.unwrap_or(d.a0),
        a1: fo.num("a1")?.unwrap_or(d.a1),
        a2: fo.num("a2")?.unwrap_or(d.a2),
        c: fo.num("c")?.unwrap_or(d.c),
    };
    let b_min = match fo.num("b_min")? {
        Some(b) => Some(positive(b, "/field/b_min")?),
        None => None,
    };

    let x0 = vec3(top.get("x0"), "/x0")?;
    let v0 = vec3(top.get("v0"), "/v0")?;

    let mut output = OutputConfig {
        path: None,
        stride: h.max(0.5),
    };
    if let Some(ov) = top.get("output") {
        let oo = Obj::new(ov, "/output")?;
        oo.only(&["path", "stride"])?;
        output.path = match oo.get("path") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(Error::schema("/output/path", "expected a string")),
        };
        if let Some(s) = oo.num("stride")? {
            output.stride = positive(s, "/output/stride")?;
        }
    }

    let r_min = match top.num("r_min")? {
        Some(r) => positive(r, "/r_min")?,
        None => DEFAULT_R_MIN,
    };
    let budget_steps = match top.get("budget_steps") {
        None => DEFAULT_BUDGET_STEPS,
        Some(v) => v
            .as_u64()
            .filter(|&b| b > 0)
            .ok_or_else(|| Error::schema("/budget_steps", "expected a positive integer"))?,
    };
    let c = match top.num("c")? {
        Some(c) => positive(c, "/c")?,
        None => DEFAULT_HORIZON_C,
    };
    if t_final > c / epsilon * (1.0 + 1e-12) {
        return Err(Error::schema(
            "/t_final",
            format!("exceeds the horizon c/epsilon = {}", c / epsilon),
        ));
    }

    Ok(RunConfig {
        epsilon,
        h,
        t_final,
        variant,
        field: FieldConfig {
            preset,
            params,
            b_min,
        },
        x0,
        v0,
        output,
        r_min,
        budget_steps,
        c,
    })
}

impl RunConfig {
    /// Canonical JSON with every default written out.
    pub fn to_json(&self) -> Value {
        let mut field = json!({
            "preset": self.field.preset,
            "a0": self.field.params.a0,
            "a1": self.field.params.a1,
            "a2": self.field.params.a2,
            "c": self.field.params.c,
        });
        if let Some(b) = self.field.b_min {
            field["b_min"] = json!(b);
        }
        let mut output = json!({ "stride": self.output.stride });
        if let Some(p) = &self.output.path {
            output["path"] = json!(p);
        }
        json!({
            "epsilon": self.epsilon,
            "h": self.h,
            "t_final": self.t_final,
            "variant": self.variant.as_str(),
            "field": field,
            "x0": self.x0,
            "v0": self.v0,
            "output": output,
            "r_min": self.r_min,
            "budget_steps": self.budget_steps,
            "c": self.c,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("config serializes")
    }

    pub fn to_spec(&self, reference: ReferencePolicy) -> ExperimentSpec {
        ExperimentSpec {
            field: self.field.params,
            epsilon: self.epsilon,
            r_min: self.r_min,
            b_min: self.field.b_min.unwrap_or(DEFAULT_B_MIN),
            x0: self.x0,
            v0: self.v0,
            variant: self.variant,
            h: self.h,
            t_final: self.t_final,
            reference,
            output_stride: self.output.stride,
            c: self.c,
            budget_steps: self.budget_steps,
            sigma_stride: 0,
        }
    }
}
