// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0
//
// Regenerates the golden report files used by the acceptance suite:
//   golden_gen [output_dir]   (default: tests/golden/reports)
// Run after any intentional change to report content or serialization.

#include <cstdio>
#include <filesystem>

#include "sitecheck/config.hpp"
#include "sitecheck/io.hpp"
#include "sitecheck/pipeline.hpp"
#include "support/e2e.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace sitecheck;
namespace fx = sitecheck::testing;

int main(int argc, char** argv) {
    const fs::path golden_dir =
        argc > 1 ? fs::path(argv[1]) : fs::path(SITECHECK_GOLDEN_DIR) / "reports";

    fx::TempDir scratch("golden-gen");
    const fx::E2eTree tree = fx::prepare_e2e_tree(scratch.path());
    const RunConfig cfg = fx::e2e_config(tree, RunMode::kImageAudio);

    Providers providers = make_providers(cfg);
    const BatchOutcome outcome = run_batch(cfg, providers);
    if (outcome.failed_count != 0) {
        std::fprintf(stderr, "golden generation hit %zu failures\n", outcome.failed_count);
        return 1;
    }

    fs::create_directories(golden_dir);
    std::size_t copied = 0;
    for (const auto& entry : fs::directory_iterator(tree.output)) {
        if (entry.path().filename() == "manifest.json") continue;
        fs::copy_file(entry.path(), golden_dir / entry.path().filename(),
                      fs::copy_options::overwrite_existing);
        ++copied;
    }
    std::printf("wrote %zu golden files to %s\n", copied, golden_dir.string().c_str());
    return 0;
}
