//! Minimal JSON Schema checker covering exactly the keyword subset the
//! shipped schemas use: type, enum, const, required, properties,
//! additionalProperties, items, minItems/maxItems, minimum/maximum,
//! oneOf, local "#/definitions/..." references, and anchored string
//! patterns over a small regex dialect (literals, escapes, character
//! classes, groups, and the ?, *, + quantifiers). Unsupported regex
//! constructs are a hard error, so schema typos fail loudly instead of
//! passing vacuously.

use serde_json::Value;

pub fn validate(root: &Value, instance: &Value) -> Result<(), String> {
    check(root, root, instance, "$")
}

fn resolve<'a>(root: &'a Value, reference: &str) -> Result<&'a Value, String> {
    let name = reference
        .strip_prefix("#/definitions/")
        .ok_or_else(|| format!("unsupported $ref {reference:?}"))?;
    root.get("definitions")
        .and_then(|defs| defs.get(name))
        .ok_or_else(|| format!("unresolved $ref {reference:?}"))
}

fn type_matches(name: &str, instance: &Value) -> Result<bool, String> {
    Ok(match name {
        "object" => instance.is_object(),
        "array" => instance.is_array(),
        "string" => instance.is_string(),
        "boolean" => instance.is_boolean(),
        "null" => instance.is_null(),
        "number" => instance.is_number(),
        "integer" => instance.as_i64().is_some() || instance.as_u64().is_some(),
        other => return Err(format!("unsupported type {other:?}")),
    })
}

fn as_rational_bound(value: &Value) -> Result<f64, String> {
    value
        .as_f64()
        .ok_or_else(|| format!("non-numeric bound {value}"))
}

fn check(root: &Value, schema: &Value, instance: &Value, path: &str) -> Result<(), String> {
    let obj = schema
        .as_object()
        .ok_or_else(|| format!("{path}: schema is not an object"))?;

    // A $ref replaces the subschema it appears in.
    if let Some(reference) = obj.get("$ref") {
        let reference = reference
            .as_str()
            .ok_or_else(|| format!("{path}: non-string $ref"))?;
        return check(root, resolve(root, reference)?, instance, path);
    }

    if let Some(expected) = obj.get("type") {
        let expected = expected
            .as_str()
            .ok_or_else(|| format!("{path}: non-string type"))?;
        if !type_matches(expected, instance)? {
            return Err(format!("{path}: expected {expected}, got {instance}"));
        }
    }

    if let Some(options) = obj.get("enum") {
        let options = options
            .as_array()
            .ok_or_else(|| format!("{path}: non-array enum"))?;
        if !options.contains(instance) {
            return Err(format!("{path}: {instance} not in enum"));
        }
    }

    if let Some(expected) = obj.get("const") {
        if instance != expected {
            return Err(format!("{path}: expected const {expected}, got {instance}"));
        }
    }

    if let Some(pattern) = obj.get("pattern") {
        let pattern = pattern
            .as_str()
            .ok_or_else(|| format!("{path}: non-string pattern"))?;
        if let Some(text) = instance.as_str() {
            if !regex_match(pattern, text)? {
                return Err(format!("{path}: {text:?} does not match {pattern:?}"));
            }
        }
    }

    if let Some(bound) = obj.get("minimum") {
        if let Some(x) = instance.as_f64() {
            if x < as_rational_bound(bound)? {
                return Err(format!("{path}: {x} below minimum {bound}"));
            }
        }
    }
    if let Some(bound) = obj.get("maximum") {
        if let Some(x) = instance.as_f64() {
            if x > as_rational_bound(bound)? {
                return Err(format!("{path}: {x} above maximum {bound}"));
            }
        }
    }

    if let Some(subschemas) = obj.get("oneOf") {
        let subschemas = subschemas
            .as_array()
            .ok_or_else(|| format!("{path}: non-array oneOf"))?;
        let hits = subschemas
            .iter()
            .filter(|sub| check(root, sub, instance, path).is_ok())
            .count();
        if hits != 1 {
            return Err(format!("{path}: {hits} of {} oneOf branches match", subschemas.len()));
        }
    }

    if let Some(map) = instance.as_object() {
        if let Some(required) = obj.get("required") {
            for key in required.as_array().into_iter().flatten() {
                let key = key
                    .as_str()
                    .ok_or_else(|| format!("{path}: non-string required entry"))?;
                if !map.contains_key(key) {
                    return Err(format!("{path}: missing required property {key:?}"));
                }
            }
        }
        let properties = obj.get("properties").and_then(Value::as_object);
        if let Some(properties) = properties {
            for (key, sub) in properties {
                if let Some(value) = map.get(key) {
                    check(root, sub, value, &format!("{path}.{key}"))?;
                }
            }
        }
        if obj.get("additionalProperties") == Some(&Value::Bool(false)) {
            for key in map.keys() {
                if !properties.is_some_and(|p| p.contains_key(key)) {
                    return Err(format!("{path}: unexpected property {key:?}"));
                }
            }
        }
    }

    if let Some(items) = instance.as_array() {
        if let Some(bound) = obj.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < bound {
                return Err(format!("{path}: {} items, need at least {bound}", items.len()));
            }
        }
        if let Some(bound) = obj.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > bound {
                return Err(format!("{path}: {} items, at most {bound} allowed", items.len()));
            }
        }
        if let Some(sub) = obj.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(root, sub, item, &format!("{path}[{i}]"))?;
            }
        }
    }

    Ok(())
}

#[derive(Debug)]
enum Atom {
    Lit(char),
    Class(Vec<(char, char)>),
    Group(Vec<(Atom, Quant)>),
}

#[derive(Debug, Clone, Copy)]
enum Quant {
    One,
    Opt,
    Star,
    Plus,
}

/// Full-string match of an anchored ^...$ pattern.
fn regex_match(pattern: &str, text: &str) -> Result<bool, String> {
    let body = pattern
        .strip_prefix('^')
        .and_then(|rest| rest.strip_suffix('$'))
        .ok_or_else(|| format!("pattern {pattern:?} must be anchored with ^...$"))?;
    let mut chars = body.chars().peekable();
    let seq = parse_seq(&mut chars, false)?;
    if chars.next().is_some() {
        return Err(format!("unbalanced ')' in pattern {pattern:?}"));
    }
    let text: Vec<char> = text.chars().collect();
    Ok(ends_after_seq(&seq, &text, 0).contains(&text.len()))
}

fn parse_seq(
    chars: &mut std::iter::Peekable<std::str::Chars<'_>>,
    in_group: bool,
) -> Result<Vec<(Atom, Quant)>, String> {
    let mut seq = Vec::new();
    while let Some(&c) = chars.peek() {
        if c == ')' {
            if in_group {
                chars.next();
                return Ok(seq);
            }
            return Err("unbalanced ')'".to_owned());
        }
        chars.next();
        let atom = match c {
            '\\' => Atom::Lit(chars.next().ok_or("dangling escape")?),
            '[' => Atom::Class(parse_class(chars)?),
            '(' => Atom::Group(parse_seq(chars, true)?),
            '|' | '{' | '.' | '*' | '+' | '?' | ']' => {
                return Err(format!("unsupported regex construct {c:?}"))
            }
            lit => Atom::Lit(lit),
        };
        let quant = match chars.peek() {
            Some('?') => {
                chars.next();
                Quant::Opt
            }
            Some('*') => {
                chars.next();
                Quant::Star
            }
            Some('+') => {
                chars.next();
                Quant::Plus
            }
            _ => Quant::One,
        };
        seq.push((atom, quant));
    }
    if in_group {
        return Err("unbalanced '('".to_owned());
    }
    Ok(seq)
}

fn parse_class(
    chars: &mut std::iter::Peekable<std::str::Chars<'_>>,
) -> Result<Vec<(char, char)>, String> {
    let mut ranges = Vec::new();
    loop {
        let c = chars.next().ok_or("unterminated character class")?;
        if c == ']' {
            return Ok(ranges);
        }
        if chars.peek() == Some(&'-') {
            let mut lookahead = chars.clone();
            lookahead.next();
            if lookahead.peek() != Some(&']') {
                chars.next();
                let end = chars.next().ok_or("unterminated range")?;
                ranges.push((c, end));
                continue;
            }
        }
        ranges.push((c, c));
    }
}

/// Every position reachable by consuming the sequence starting at `pos`.
fn ends_after_seq(seq: &[(Atom, Quant)], text: &[char], pos: usize) -> Vec<usize> {
    let Some(((atom, quant), rest)) = seq.split_first() else {
        return vec![pos];
    };
    let once = |p: usize| ends_after_atom(atom, text, p);
    let mut starts = match quant {
        Quant::One => once(pos),
        Quant::Opt => {
            let mut v = vec![pos];
            v.extend(once(pos));
            v
        }
        Quant::Star | Quant::Plus => {
            // Atoms consume at least one character, so the frontier
            // strictly advances and this closure terminates.
            let mut seen = vec![pos];
            let mut frontier = vec![pos];
            while let Some(p) = frontier.pop() {
                for next in once(p) {
                    if !seen.contains(&next) {
                        seen.push(next);
                        frontier.push(next);
                    }
                }
            }
            if matches!(quant, Quant::Plus) {
                seen.retain(|&p| p != pos);
            }
            seen
        }
    };
    starts.sort_unstable();
    starts.dedup();
    let mut out = Vec::new();
    for start in starts {
        out.extend(ends_after_seq(rest, text, start));
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn ends_after_atom(atom: &Atom, text: &[char], pos: usize) -> Vec<usize> {
    match atom {
        Atom::Lit(c) => match text.get(pos) {
            Some(&x) if x == *c => vec![pos + 1],
            _ => Vec::new(),
        },
        Atom::Class(ranges) => match text.get(pos) {
            Some(&x) if ranges.iter().any(|&(lo, hi)| lo <= x && x <= hi) => vec![pos + 1],
            _ => Vec::new(),
        },
        Atom::Group(seq) => ends_after_seq(seq, text, pos),
    }
}
