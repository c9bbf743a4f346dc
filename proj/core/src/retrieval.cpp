#include "mednns/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "mednns/errors.hpp"
#include "mednns/io.hpp"

namespace mednns {

ModelIndex build_index(const MetaSpaceParams& params, const ZooManifest& manifest,
                       const Tensor& model_inputs) {
    if (model_inputs.rank() != 2 || model_inputs.dim(0) != manifest.entries.size())
        throw DataError("build_index: model input rows do not match manifest entries");
    ModelIndex index;
    index.embeddings = embed_models(params, model_inputs);
    index.zoo_fingerprint = manifest.fingerprint();
    return index;
}

void save_index(const std::string& path, const ModelIndex& index) {
    save_tensors(path, {&index.embeddings});
    nlohmann::json j;
    j["zoo_fingerprint"] = index.zoo_fingerprint;
    write_text_file(path + ".json", j.dump(2) + "\n");
}

ModelIndex load_index(const std::string& path, const ZooManifest& manifest) {
    ModelIndex index;
    std::vector<Tensor> tensors = load_tensors(path);
    if (tensors.size() != 1 || tensors[0].rank() != 2)
        throw DataError("model index file is malformed: " + path);
    index.embeddings = std::move(tensors[0]);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model index header parse error: ") + e.what());
    }
    index.zoo_fingerprint = j.at("zoo_fingerprint").get<std::uint64_t>();
    if (index.zoo_fingerprint != manifest.fingerprint())
        throw DataError("model index was built against a different zoo manifest");
    if (index.embeddings.dim(0) != manifest.entries.size())
        throw DataError("model index row count does not match the zoo manifest");
    return index;
}

QueryResult query(const ModelIndex& index, const Tensor& d_emb, std::size_t k) {
    const std::size_t n = index.embeddings.dim(0);
    const std::size_t d = index.embeddings.dim(1);
    if (n == 0) throw DataError("query: empty model index");
    if (k == 0) throw UsageError("query: k must be at least 1");
    if (d_emb.size() != d) throw DataError("query: embedding dimension mismatch");

    QueryResult result;
    if (k > n) {
        k = n;
        result.clamped = true;
    }
    std::vector<ScoredEntry> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c)
            acc += static_cast<double>(index.embeddings.at(i, c)) * d_emb[c];
        all[i] = ScoredEntry{i, acc};
    }
    std::stable_sort(all.begin(), all.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.manifest_index < b.manifest_index;
    });
    all.resize(k);
    result.ranked = std::move(all);
    return result;
}

Tensor embed_new_dataset(const DatasetDescriptor& ds, const FrozenExtractor& extractor,
                         const MetaSpaceParams& params, std::size_t n_img, Rng rng) {
    const RawDatasetEncoding raw = encode_dataset(ds, extractor, n_img, rng);
    Tensor row({1, raw.mean.size()});
    for (std::size_t i = 0; i < raw.mean.size(); ++i) row.at(0, i) = raw.mean[i];
    const Tensor emb = embed_datasets(params, row);
    Tensor out({emb.dim(1)});
    for (std::size_t i = 0; i < emb.dim(1); ++i) out[i] = emb.at(0, i);
    return out;
}

SelectionResult topk_select(const QueryResult& candidates, const ZooManifest& manifest,
                            const std::map<std::string, const SupernetCheckpoint*>& supernets,
                            const DatasetDescriptor& target, const Splits& target_splits,
                            std::size_t finetune_epochs, std::size_t batch_size,
                            const AdamConfig& adam, std::uint64_t seed) {
    if (candidates.ranked.empty()) throw UsageError("topk_select: no candidates");
    SelectionResult result;
    result.outcomes.reserve(candidates.ranked.size());
    for (const ScoredEntry& cand : candidates.ranked) {
        const ZooEntry& entry = manifest.entries.at(cand.manifest_index);
        auto it = supernets.find(entry.supernet_ref);
        if (it == supernets.end() || it->second == nullptr)
            throw DataError("topk_select: no supernet loaded for " + entry.supernet_ref);
        const SupernetCheckpoint& ckpt = *it->second;

        FineTuneOutcome out;
        out.manifest_index = cand.manifest_index;
        out.cosine = cand.score;
        out.net = extract_compact(ckpt.net, ckpt.space, entry.arch);
        // Seeded by candidate identity so the same candidate behaves
        // identically whether it appears in the T1, T5 or T10 prefix.
        Rng ft_rng = Rng(seed).fork(fnv1a64("finetune:" + target.id + ":" + entry.dataset_id +
                                            "|" + entry.arch.fingerprint()));
        train_net(out.net, target, target_splits.train, target_splits.val, finetune_epochs,
                  batch_size, adam, ft_rng);
        out.val_acc = evaluate_accuracy(out.net, target, target_splits.val);
        result.outcomes.push_back(std::move(out));
    }
    // Candidates are already in descending-cosine, ascending-index order, so
    // keeping the first strict maximum applies both tie-break rules.
    result.chosen = 0;
    for (std::size_t i = 1; i < result.outcomes.size(); ++i)
        if (result.outcomes[i].val_acc > result.outcomes[result.chosen].val_acc) result.chosen = i;
    return result;
}

}  // namespace mednns
