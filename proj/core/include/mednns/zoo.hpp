#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mednns/dataio.hpp"
#include "mednns/supernet.hpp"

namespace mednns {

struct ZooEntry {
    std::string dataset_id;
    ArchitectureConfig arch;
    std::string supernet_ref;              // checkpoint path
    double estimated_perf = 0.0;           // P-hat, inherited weights
    std::optional<double> scratch_perf;    // P, filled by audit_rank
};

struct ZooManifest {
    std::string schema = "mednns-zoo/1";
    std::string space_json;
    std::uint64_t space_fingerprint = 0;
    std::uint64_t seed = 0;
    std::size_t subnets_per_dataset = 0;
    std::vector<ZooEntry> entries;

    std::uint64_t fingerprint() const;  // of the serialized form
};

// One dataset's trained supernet plus the data P-hat is estimated on.
struct ZooSource {
    std::string dataset_id;
    const ConvNet* supernet = nullptr;
    const DatasetDescriptor* dataset = nullptr;
    const Splits* splits = nullptr;
    std::string checkpoint_ref;
};

enum class ZooPolicy { All, Sample };

// Estimates P-hat for every (dataset, subnet) pair; performs zero weight
// updates. "All" enumerates the space (refused above 4096 configs),
// "Sample" fair-samples `subnets_per_dataset` distinct configs.
ZooManifest build_zoo(const std::vector<ZooSource>& sources, const SearchSpace& space,
                      ZooPolicy policy, std::size_t subnets_per_dataset, std::uint64_t seed);

struct RankAudit {
    std::string dataset_id;
    std::optional<double> rho;  // nullopt => degenerate (zero variance)
    std::size_t k = 0;
};

// Scratch-trains k architectures per dataset from fresh initialization,
// fills scratch_perf on the matching entries, and reports Spearman(P-hat, P).
std::vector<RankAudit> audit_rank(ZooManifest& manifest, const std::vector<ZooSource>& sources,
                                  const SearchSpace& space, std::size_t k,
                                  std::size_t scratch_epochs, std::size_t batch_size,
                                  const AdamConfig& adam, std::uint64_t seed);

std::string serialize_zoo(const ZooManifest& manifest);
ZooManifest parse_zoo(const std::string& text);
void save_zoo(const std::string& path, const ZooManifest& manifest);
ZooManifest load_zoo(const std::string& path);

}  // namespace mednns
