#pragma once

namespace safe {

// records: machine-readable JSON lines at full precision.
// table: aligned human-readable columns, values rounded for display.
enum class ReportFormat { records, table };

}  // namespace safe
