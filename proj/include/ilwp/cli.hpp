#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ilwp::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kFormat = 2,
    kIo = 3,
};

/// Entry point behind the `ilwp` executable. `args` includes the program name.
///
///   ilwp encode  [--mode M] [--bits N] IN.wgt [OUT.ilw | --out OUT.ilw]
///   ilwp decode  IN.ilw [OUT.wgt | --out OUT.wgt]
///   ilwp stats   [--mode M] [--bits N] [--report json|csv] [--bin-width W] IN.wgt [REPORT]
///   ilwp sweep   [--mode M] [--bits N,N,...] [--report csv|json] IN.wgt [REPORT]
///   ilwp heatmap [--report json|csv] IN.wgt [REPORT]
///
/// Reports without an output path go to `out`, and the summary line then goes
/// to `err` so the report stays parseable. Diagnostics go to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// "2,3,8" -> {2, 3, 8}. Throws ConfigError on malformed or out-of-range entries.
std::vector<int> parse_bit_list(std::string_view text);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place, so a
/// failure never leaves a partial `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace ilwp::cli
