#pragma once

// Pipeline commands. Each reads its inputs from the config and from the
// artifacts earlier stages left in `out`, writes its own artifacts and
// report there, and returns the report.

#include <filesystem>
#include <iosfwd>

#include "wse/config.hpp"
#include "wse/report.hpp"

namespace wse {

// corpus.jsonl + embeddings.bin
Report cmd_synth(const RunConfig& cfg, const std::filesystem::path& out);
// filtered.jsonl, manifest_<i>.jsonl, replaced_<i>.jsonl, split.jsonl
Report cmd_build(const RunConfig& cfg, const std::filesystem::path& out);
// embeddings_<i>.bin
Report cmd_encode(const RunConfig& cfg, const std::filesystem::path& out);
// checkpoint_<i>.bin
Report cmd_train(const RunConfig& cfg, const std::filesystem::path& out);
Report cmd_eval_wse(const RunConfig& cfg, const std::filesystem::path& out);
Report cmd_eval_wsd(const RunConfig& cfg, const std::filesystem::path& out);

// Entry point of the `wse` tool. Exit codes: 0 success, 1 usage error,
// 2 data or format error, 3 invariant violation.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wse
