//! Minimal CSV emission: fixed-precision numbers, `\n` line endings, no
//! quoting. Field values never contain commas, so no escaping is needed.

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Field {
    fn render(&self, precision: usize) -> String {
        match self {
            Field::Num(x) => format!("{x:.precision$}"),
            Field::Int(n) => n.to_string(),
            Field::Text(s) => s.clone(),
            Field::Empty => String::new(),
        }
    }
}

/// Render a header plus rows. An empty row set yields the header line only.
pub fn render(header: &[&str], rows: &[Vec<Field>], precision: usize) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|f| f.render(precision)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
