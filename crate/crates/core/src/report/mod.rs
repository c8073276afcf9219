//! Output tables and per-feature bar charts.

mod chart;
mod table;

pub use chart::{chart_for_column, render_chart, ChartSpec, Scale, EVEN_WEEK_SHADE, ODD_WEEK_SHADE};
pub use table::{write_table, Cell, Format, Table};
