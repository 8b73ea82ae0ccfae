//! Tool schemas and tool invocations.
//!
//! A [`ToolSpec`] serializes to the JSON block used throughout the corpus:
//!
//! ```json
//! {
//!   "name": "simple_car_rental",
//!   "description": "Basic Car Rental Service",
//!   "arguments": {
//!     "type": "object",
//!     "properties": { "carCode": { "description": "Car code", "type": "string" } },
//!     "required": ["carCode"]
//!   },
//!   "returns": { "status": "Rental status" }
//! }
//! ```
//!
//! Parameters and return fields keep their declaration order and are stored as
//! lists so that malformed input with repeated keys stays observable to
//! [`validate_tool`] instead of being silently collapsed.

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Name of the pseudo-tool meaning "answer directly, no tool applies".
pub const SENTINEL_TOOL: &str = "generate_response";

/// Canonical form used for every tool-name comparison: surrounding whitespace
/// is dropped, case is kept.
pub fn normalize_name(name: &str) -> &str {
    name.trim()
}

/// Splits an identifier on `_`, `-`, spaces, and lower→upper camel-case
/// boundaries, returning lower-cased words: `pickupTime` → `["pickup", "time"]`,
/// `model_number` → `["model", "number"]`, `apartmentID` → `["apartment", "id"]`.
pub fn identifier_words(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if c == '_' || c == '-' || c.is_whitespace() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev_lower = false;
            continue;
        }
        if c.is_uppercase() && prev_lower && !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
        prev_lower = c.is_lowercase() || c.is_ascii_digit();
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSpec {
    pub name: String,
    pub description: String,
    pub type_tag: String,
    pub required: bool,
}

impl ParameterSpec {
    pub fn new(name: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            type_tag: "string".to_string(),
            required: true,
        }
    }

    pub fn optional(mut self) -> Self {
        self.required = false;
        self
    }

    pub fn with_type(mut self, type_tag: impl Into<String>) -> Self {
        self.type_tag = type_tag.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnField {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    pub parameters: Vec<ParameterSpec>,
    pub returns: Vec<ReturnField>,
}

impl ToolSpec {
    pub fn new(name: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            parameters: Vec::new(),
            returns: Vec::new(),
        }
    }

    pub fn param(mut self, param: ParameterSpec) -> Self {
        self.parameters.push(param);
        self
    }

    pub fn returns(mut self, name: impl Into<String>, description: impl Into<String>) -> Self {
        self.returns.push(ReturnField {
            name: name.into(),
            description: description.into(),
        });
        self
    }

    /// The `generate_response` pseudo-tool. It takes no parameters and is
    /// listed in every toolset so rank labels stay full permutations.
    pub fn sentinel() -> Self {
        ToolSpec::new(
            SENTINEL_TOOL,
            "Respond to the user directly without calling any tool",
        )
        .returns("response", "Direct natural-language response")
    }

    pub fn is_sentinel(&self) -> bool {
        normalize_name(&self.name) == SENTINEL_TOOL
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn parameter_names(&self) -> impl Iterator<Item = &str> {
        self.parameters.iter().map(|p| p.name.as_str())
    }

    pub fn required_parameters(&self) -> impl Iterator<Item = &ParameterSpec> {
        self.parameters.iter().filter(|p| p.required)
    }

    /// Text used when embedding the tool: name, description, parameter and
    /// return descriptions joined by single spaces.
    pub fn embedding_text(&self) -> String {
        let mut parts = vec![self.name.as_str(), self.description.as_str()];
        parts.extend(self.parameters.iter().map(|p| p.description.as_str()));
        parts.extend(self.returns.iter().map(|r| r.description.as_str()));
        parts.retain(|p| !p.trim().is_empty());
        parts.join(" ")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("tool specs always serialize")
    }
}

/// Structural violations of the tool invariants; an empty list means valid.
pub fn validate_tool(spec: &ToolSpec) -> Vec<String> {
    let mut violations = Vec::new();
    if spec.name.trim().is_empty() {
        violations.push("empty name".to_string());
    } else if spec.name.trim() != spec.name {
        violations.push("name has surrounding whitespace".to_string());
    }
    let mut seen = HashSet::new();
    for p in &spec.parameters {
        if p.name.trim().is_empty() {
            violations.push("empty parameter name".to_string());
        } else if !seen.insert(p.name.as_str()) {
            violations.push("duplicate parameter".to_string());
        }
    }
    if spec.returns.is_empty() {
        violations.push("no return fields".to_string());
    }
    let mut seen = HashSet::new();
    for r in &spec.returns {
        if !seen.insert(r.name.as_str()) {
            violations.push("duplicate return field".to_string());
        }
    }
    violations
}

// --- wire format ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WireParameter {
    #[serde(default)]
    description: String,
    #[serde(rename = "type", default = "default_type_tag")]
    type_tag: String,
}

fn default_type_tag() -> String {
    "string".to_string()
}

#[derive(Serialize, Deserialize)]
struct WireArguments {
    #[serde(rename = "type", default = "default_object_tag")]
    type_tag: String,
    #[serde(default)]
    properties: OrderedEntries<WireParameter>,
    #[serde(default)]
    required: Vec<String>,
}

fn default_object_tag() -> String {
    "object".to_string()
}

#[derive(Serialize, Deserialize)]
struct WireTool {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    arguments: Option<WireArguments>,
    #[serde(default)]
    returns: OrderedEntries<TextOrJson>,
}

/// A JSON object decoded as a list of entries so repeated keys survive.
struct OrderedEntries<T>(Vec<(String, T)>);

impl<T> Default for OrderedEntries<T> {
    fn default() -> Self {
        Self(Vec::new())
    }
}

impl<T: Serialize> Serialize for OrderedEntries<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for OrderedEntries<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor<T>(std::marker::PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for EntriesVisitor<T> {
            type Value = OrderedEntries<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, T>()? {
                    entries.push((k, v));
                }
                Ok(OrderedEntries(entries))
            }
        }

        deserializer.deserialize_map(EntriesVisitor(std::marker::PhantomData))
    }
}

/// Return descriptions are text, but real schemas sometimes carry arrays or
/// objects there; those are kept as their compact JSON text.
struct TextOrJson(String);

impl Serialize for TextOrJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for TextOrJson {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        Ok(TextOrJson(match value {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        }))
    }
}

impl Serialize for ToolSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = WireTool {
            name: self.name.clone(),
            description: self.description.clone(),
            arguments: Some(WireArguments {
                type_tag: default_object_tag(),
                properties: OrderedEntries(
                    self.parameters
                        .iter()
                        .map(|p| {
                            (
                                p.name.clone(),
                                WireParameter {
                                    description: p.description.clone(),
                                    type_tag: p.type_tag.clone(),
                                },
                            )
                        })
                        .collect(),
                ),
                required: self
                    .parameters
                    .iter()
                    .filter(|p| p.required)
                    .map(|p| p.name.clone())
                    .collect(),
            }),
            returns: OrderedEntries(
                self.returns
                    .iter()
                    .map(|r| (r.name.clone(), TextOrJson(r.description.clone())))
                    .collect(),
            ),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ToolSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = WireTool::deserialize(deserializer)?;
        let (properties, required) = match wire.arguments {
            Some(args) => (args.properties.0, args.required),
            None => (Vec::new(), Vec::new()),
        };
        for name in &required {
            if !properties.iter().any(|(k, _)| k == name) {
                return Err(de::Error::custom(format!(
                    "required parameter `{name}` is not declared under properties"
                )));
            }
        }
        Ok(ToolSpec {
            name: wire.name,
            description: wire.description,
            parameters: properties
                .into_iter()
                .map(|(name, p)| ParameterSpec {
                    required: required.contains(&name),
                    name,
                    description: p.description,
                    type_tag: p.type_tag,
                })
                .collect(),
            returns: wire
                .returns
                .0
                .into_iter()
                .map(|(name, d)| ReturnField {
                    name,
                    description: d.0,
                })
                .collect(),
        })
    }
}

/// A concrete invocation: tool name plus ordered argument values.
///
/// Values are kept as text even when they look numeric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolCall {
    pub tool_name: String,
    #[serde(default)]
    pub arguments: IndexMap<String, String>,
}

impl ToolCall {
    pub fn new(tool_name: impl Into<String>) -> Self {
        Self {
            tool_name: tool_name.into(),
            arguments: IndexMap::new(),
        }
    }

    pub fn arg(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.arguments.insert(key.into(), value.into());
        self
    }

    /// `generate_response()`.
    pub fn sentinel() -> Self {
        Self::new(SENTINEL_TOOL)
    }

    pub fn is_sentinel(&self) -> bool {
        normalize_name(&self.tool_name) == SENTINEL_TOOL && self.arguments.is_empty()
    }

    /// Structural equality after name normalization, ignoring argument order.
    pub fn same_call(&self, other: &ToolCall) -> bool {
        normalize_name(&self.tool_name) == normalize_name(&other.tool_name)
            && self.arguments.len() == other.arguments.len()
            && self.arguments.iter().all(|(k, v)| {
                other
                    .arguments
                    .iter()
                    .any(|(ok, ov)| normalize_name(ok) == normalize_name(k) && ov == v)
            })
    }
}

impl fmt::Display for ToolCall {
    /// Invocation syntax: `name("key"="value", ...)`, with `"` and `\` in
    /// values backslash-escaped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.tool_name)?;
        for (i, (k, v)) in self.arguments.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "\"{}\"=\"{}\"", escape(k), escape(v))?;
        }
        f.write_str(")")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn car_rental() -> ToolSpec {
        ToolSpec::new("simple_car_rental", "Basic Car Rental Service")
            .param(ParameterSpec::new("pickupLocation", "Pickup location"))
            .param(ParameterSpec::new("dropOffLocation", "Drop-off location"))
            .param(ParameterSpec::new("pickupTime", "Pickup time"))
            .param(ParameterSpec::new("dropOffTime", "Drop-off time"))
            .param(ParameterSpec::new("carCode", "Car code"))
            .returns("status", "Rental status")
            .returns("cost", "Rental cost")
    }

    #[test]
    fn identifier_word_splitting() {
        assert_eq!(identifier_words("pickupTime"), ["pickup", "time"]);
        assert_eq!(identifier_words("model_number"), ["model", "number"]);
        assert_eq!(identifier_words("apartmentID"), ["apartment", "id"]);
        assert_eq!(identifier_words("__a--b c"), ["a", "b", "c"]);
    }

    #[test]
    fn well_formed_tool_has_no_violations() {
        assert!(validate_tool(&car_rental()).is_empty());
        assert!(validate_tool(&ToolSpec::sentinel()).is_empty());
    }

    #[test]
    fn duplicate_parameter_is_reported() {
        let tool = car_rental().param(ParameterSpec::new("carCode", "again"));
        assert_eq!(validate_tool(&tool), vec!["duplicate parameter"]);
    }

    #[test]
    fn empty_name_is_reported() {
        let mut tool = car_rental();
        tool.name = "  ".into();
        assert_eq!(validate_tool(&tool), vec!["empty name"]);
    }

    #[test]
    fn missing_returns_is_reported() {
        let mut tool = car_rental();
        tool.returns.clear();
        assert_eq!(validate_tool(&tool), vec!["no return fields"]);
    }

    #[test]
    fn duplicate_keys_survive_decoding() {
        let raw = r#"{"name":"t","description":"d",
            "arguments":{"type":"object","properties":{"a":{"description":"x"},"a":{"description":"y"}},"required":["a"]},
            "returns":{"r":"out"}}"#;
        let tool: ToolSpec = serde_json::from_str(raw).unwrap();
        assert_eq!(tool.parameters.len(), 2);
        assert_eq!(validate_tool(&tool), vec!["duplicate parameter"]);
    }

    #[test]
    fn schema_uses_properties_under_arguments() {
        let json = serde_json::to_value(car_rental()).unwrap();
        assert_eq!(
            json["arguments"]["properties"]["carCode"]["description"],
            "Car code"
        );
        assert_eq!(json["arguments"]["required"][4], "carCode");
        assert_eq!(json["returns"]["cost"], "Rental cost");
        let back: ToolSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, car_rental());
    }

    #[test]
    fn non_text_return_description_is_kept_as_json() {
        let raw = r#"{"name":"t","returns":{"listings":["id","price"]}}"#;
        let tool: ToolSpec = serde_json::from_str(raw).unwrap();
        assert_eq!(tool.returns[0].description, r#"["id","price"]"#);
        assert!(tool.parameters.is_empty());
    }

    #[test]
    fn undeclared_required_parameter_is_rejected() {
        let raw = r#"{"name":"t","arguments":{"properties":{},"required":["x"]},"returns":{"r":"o"}}"#;
        assert!(serde_json::from_str::<ToolSpec>(raw).is_err());
    }

    #[test]
    fn call_display_escapes_quotes() {
        let call = ToolCall::new("f").arg("q", r#"say "hi" \o/"#);
        assert_eq!(call.to_string(), r#"f("q"="say \"hi\" \\o/")"#);
        assert_eq!(ToolCall::sentinel().to_string(), "generate_response()");
    }

    #[test]
    fn same_call_ignores_argument_order_and_name_padding() {
        let a = ToolCall::new("f").arg("x", "1").arg("y", "2");
        let b = ToolCall::new(" f ").arg("y", "2").arg("x", "1");
        assert!(a.same_call(&b));
        assert!(!a.same_call(&ToolCall::new("f").arg("x", "1")));
    }
}
