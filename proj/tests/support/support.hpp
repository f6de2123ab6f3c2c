#pragma once

// Shared by the unit tests and the acceptance binary: fixture lookup, the parser
// corpus check, and the random instance generators with their independent oracles.

#include "reportkg/compliance.hpp"
#include "reportkg/kg.hpp"
#include "reportkg/pipeline.hpp"
#include "reportkg/vkg.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace reportkg::support {

std::filesystem::path source_dir();
std::filesystem::path fixture(const std::string& relative);
std::string read_file(const std::filesystem::path& path);

/// Fresh empty directory under the system temp dir; removed by the destructor.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct CorpusResult {
    std::size_t entries = 0;
    std::vector<std::string> failures;
};

/// Checks every entry of tests/fixtures/parser_corpus.json against its expected structure.
CorpusResult check_parser_corpus(const std::filesystem::path& corpus);

// Oracle cases. Every quantity is an integer count of 1e-15 base units, rendered
// with a random SI prefix; the expected verdict comes from integer comparison only.
struct OracleCase {
    std::string measured_text;
    std::string limits_text;
    compliance::Verdict expected = compliance::Verdict::Unknown;
    bool boundary = false;
};

OracleCase random_oracle_case(std::mt19937_64& rng);

// Random virtual knowledge graph instances.
struct VkgInstance {
    kg::TripleStore store;
    std::vector<vkg::Mapping> mappings;
    std::vector<RowTable> tables;
    std::vector<vkg::BGPQuery> queries;
    std::size_t rows = 0;
};

VkgInstance random_vkg_instance(std::mt19937_64& rng, std::size_t max_mappings = 5, std::size_t max_rows = 200);

/// Materializes every mapping and evaluates by brute force over the full triple list,
/// expanding sosa:observedProperty objects over the store's subclass axioms.
std::vector<kg::Bindings> naive_answer(const vkg::BGPQuery& query, const kg::TripleStore& store,
                                       const std::vector<vkg::Mapping>& mappings, const std::vector<RowTable>& tables);

/// Copy of data/reportkg.conf with absolute paths and `data_dir`.
std::filesystem::path write_test_config(const std::filesystem::path& dir, const std::string& backend = "mock");

std::vector<std::filesystem::path> batch_reports();

/// Rows in the workspace tables that reached them without a "validated" status or a
/// matching resolved review item, plus open items that were integrated anyway.
std::vector<std::string> integrity_violations(const pipeline::Workspace& workspace);

}  // namespace reportkg::support
