#include "mednns/zoo.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mednns/errors.hpp"
#include "mednns/io.hpp"
#include "mednns/stats.hpp"

namespace mednns {

std::uint64_t ZooManifest::fingerprint() const { return fnv1a64(serialize_zoo(*this)); }

ZooManifest build_zoo(const std::vector<ZooSource>& sources, const SearchSpace& space,
                      ZooPolicy policy, std::size_t subnets_per_dataset, std::uint64_t seed) {
    if (sources.empty()) throw DataError("build_zoo: no sources");
    space.validate();
    std::vector<ArchitectureConfig> configs;
    if (policy == ZooPolicy::All) {
        if (space.num_configs() > 4096)
            throw DataError("build_zoo: refusing to enumerate more than 4096 configs");
        for (std::size_t i = 0; i < space.num_configs(); ++i)
            configs.push_back(config_at(space, i));
    } else {
        if (subnets_per_dataset == 0 || subnets_per_dataset > space.num_configs())
            throw DataError("build_zoo: invalid subnets_per_dataset");
        FairnessSampler sampler(space, Rng(seed));
        std::set<std::size_t> seen;
        while (configs.size() < subnets_per_dataset) {
            const ArchitectureConfig cfg = sampler.next();
            if (seen.insert(config_index(space, cfg)).second) configs.push_back(cfg);
        }
    }

    ZooManifest manifest;
    manifest.space_json = space.to_json();
    manifest.space_fingerprint = fnv1a64(manifest.space_json);
    manifest.seed = seed;
    manifest.subnets_per_dataset = configs.size();
    for (const ZooSource& src : sources) {
        if (!src.supernet || !src.dataset || !src.splits)
            throw DataError("build_zoo: missing supernet for dataset " + src.dataset_id);
        for (const ArchitectureConfig& cfg : configs) {
            ZooEntry e;
            e.dataset_id = src.dataset_id;
            e.arch = cfg;
            e.supernet_ref = src.checkpoint_ref;
            e.estimated_perf = estimate_performance(*src.supernet, config_to_mask(space, cfg),
                                                    *src.dataset, src.splits->val);
            manifest.entries.push_back(std::move(e));
        }
    }
    return manifest;
}

std::vector<RankAudit> audit_rank(ZooManifest& manifest, const std::vector<ZooSource>& sources,
                                  const SearchSpace& space, std::size_t k,
                                  std::size_t scratch_epochs, std::size_t batch_size,
                                  const AdamConfig& adam, std::uint64_t seed) {
    if (k < 3) throw UsageError("audit_rank: k must be >= 3 for a meaningful correlation");
    std::vector<RankAudit> audits;
    for (const ZooSource& src : sources) {
        std::vector<std::size_t> entry_idx;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i)
            if (manifest.entries[i].dataset_id == src.dataset_id) entry_idx.push_back(i);
        if (entry_idx.size() < k)
            throw UsageError("audit_rank: k exceeds entries for dataset " + src.dataset_id);
        // Spread picks evenly across the estimated-performance range so the audit
        // covers weak and strong subnets rather than a random slice of the zoo.
        std::stable_sort(entry_idx.begin(), entry_idx.end(), [&](std::size_t a, std::size_t b) {
            return manifest.entries[a].estimated_perf < manifest.entries[b].estimated_perf;
        });
        std::vector<std::size_t> picks;
        for (std::size_t j = 0; j < k; ++j)
            picks.push_back(entry_idx[j * entry_idx.size() / k]);

        std::vector<double> phat, pscratch;
        for (std::size_t pi : picks) {
            ZooEntry& entry = manifest.entries[pi];
            const ConvNet compact = extract_compact(*src.supernet, space, entry.arch);
            Rng init_rng =
                Rng(seed).fork(fnv1a64("scratch:" + src.dataset_id + ":" + entry.arch.fingerprint()));
            ConvNet fresh(compact.net_dims(), init_rng);
            const TrainLog log = train_net(fresh, *src.dataset, src.splits->train,
                                           src.splits->val, scratch_epochs, batch_size, adam,
                                           init_rng.fork(1));
            // Median validation accuracy over the final three epochs: a
            // variance-reduced estimate of converged scratch performance.
            std::vector<double> tail;
            for (std::size_t e = log.epochs.size() >= 3 ? log.epochs.size() - 3 : 0;
                 e < log.epochs.size(); ++e)
                tail.push_back(log.epochs[e].val_acc);
            std::sort(tail.begin(), tail.end());
            entry.scratch_perf = tail.empty() ? 0.0 : tail[tail.size() / 2];
            phat.push_back(entry.estimated_perf);
            pscratch.push_back(*entry.scratch_perf);
        }
        RankAudit a;
        a.dataset_id = src.dataset_id;
        a.k = k;
        a.rho = spearman(phat, pscratch);
        audits.push_back(std::move(a));
    }
    return audits;
}

namespace {

nlohmann::json entry_to_json(const ZooEntry& e) {
    nlohmann::json j;
    j["dataset_id"] = e.dataset_id;
    j["arch"] = e.arch.fingerprint();
    j["supernet_ref"] = e.supernet_ref;
    j["estimated_perf"] = e.estimated_perf;
    if (e.scratch_perf) j["scratch_perf"] = *e.scratch_perf;
    return j;
}

}  // namespace

std::string serialize_zoo(const ZooManifest& manifest) {
    std::ostringstream os;
    nlohmann::json header;
    header["schema"] = manifest.schema;
    header["space"] = nlohmann::json::parse(manifest.space_json);
    header["space_fingerprint"] = manifest.space_fingerprint;
    header["seed"] = manifest.seed;
    header["subnets_per_dataset"] = manifest.subnets_per_dataset;
    os << header.dump() << "\n";
    for (const ZooEntry& e : manifest.entries) os << entry_to_json(e).dump() << "\n";
    return os.str();
}

ZooManifest parse_zoo(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("zoo manifest: empty file");
    ZooManifest manifest;
    try {
        nlohmann::json header = nlohmann::json::parse(line);
        manifest.schema = header.at("schema").get<std::string>();
        if (manifest.schema != "mednns-zoo/1")
            throw DataError("zoo manifest: unsupported schema " + manifest.schema);
        manifest.space_json = header.at("space").dump();
        manifest.space_fingerprint = header.at("space_fingerprint").get<std::uint64_t>();
        manifest.seed = header.at("seed").get<std::uint64_t>();
        manifest.subnets_per_dataset = header.at("subnets_per_dataset").get<std::size_t>();
        std::set<std::pair<std::string, std::string>> seen;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            ZooEntry e;
            e.dataset_id = j.at("dataset_id").get<std::string>();
            e.arch = ArchitectureConfig::parse(j.at("arch").get<std::string>());
            e.supernet_ref = j.at("supernet_ref").get<std::string>();
            e.estimated_perf = j.at("estimated_perf").get<double>();
            if (j.contains("scratch_perf")) e.scratch_perf = j.at("scratch_perf").get<double>();
            if (!seen.insert({e.dataset_id, j.at("arch").get<std::string>()}).second)
                throw DataError("zoo manifest: duplicate (dataset, arch) pair");
            manifest.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("zoo manifest parse error: ") + e.what());
    }
    // Round-trip check against the parsed space.
    SearchSpace::from_json(manifest.space_json);
    return manifest;
}

void save_zoo(const std::string& path, const ZooManifest& manifest) {
    write_text_file(path, serialize_zoo(manifest));
}

ZooManifest load_zoo(const std::string& path) { return parse_zoo(read_text_file(path)); }

}  // namespace mednns
