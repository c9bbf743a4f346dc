#include "mednns/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "mednns/errors.hpp"
#include "mednns/io.hpp"
#include "mednns/stats.hpp"

namespace mednns {

namespace {

std::string format_acc(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

ZooEncodings encode_zoo(const ZooManifest& manifest,
                        const std::map<std::string, const SupernetCheckpoint*>& supernets,
                        const std::map<std::string, const DatasetDescriptor*>& datasets,
                        const FrozenExtractor& extractor, const FunctionalProbe& probe,
                        std::size_t n_img, std::uint64_t encode_seed) {
    if (manifest.entries.empty()) throw DataError("encode_zoo: empty manifest");
    const SearchSpace space = SearchSpace::from_json(manifest.space_json);

    ZooEncodings enc;
    std::map<std::string, std::size_t> dataset_row;
    for (const ZooEntry& e : manifest.entries) {
        if (dataset_row.count(e.dataset_id)) continue;
        dataset_row[e.dataset_id] = enc.data.dataset_ids.size();
        enc.data.dataset_ids.push_back(e.dataset_id);
    }

    const std::size_t k = enc.data.dataset_ids.size();
    enc.data.dataset_inputs = Tensor({k, extractor.feature_dim()});
    enc.dataset_stats.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::string& id = enc.data.dataset_ids[i];
        auto it = datasets.find(id);
        if (it == datasets.end() || it->second == nullptr)
            throw DataError("encode_zoo: no dataset loaded for " + id);
        Rng rng = Rng(encode_seed).fork(fnv1a64("encode:" + id));
        RawDatasetEncoding raw = encode_dataset(*it->second, extractor, n_img, rng);
        for (std::size_t c = 0; c < raw.mean.size(); ++c)
            enc.data.dataset_inputs.at(i, c) = raw.mean[c];
        enc.dataset_stats[i] = std::move(raw.stats);
    }

    enc.data.fid_matrix = Tensor({k, k});
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const float v = static_cast<float>(fid(enc.dataset_stats[i], enc.dataset_stats[j]));
            enc.data.fid_matrix.at(i, j) = v;
            enc.data.fid_matrix.at(j, i) = v;
        }

    const std::size_t n = manifest.entries.size();
    const std::size_t arch_len = space.stages * 3;
    const std::size_t func_len = space.maximal_dims().penult_channels();
    enc.data.model_inputs = Tensor({n, arch_len + func_len});
    enc.data.model_dataset.resize(n);
    enc.data.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ZooEntry& e = manifest.entries[i];
        auto it = supernets.find(e.supernet_ref);
        if (it == supernets.end() || it->second == nullptr)
            throw DataError("encode_zoo: no supernet loaded for " + e.supernet_ref);
        const Tensor arch_part = encode_architecture(space, e.arch);
        const Mask mask = config_to_mask(space, e.arch);
        const Tensor func_part = encode_functional(it->second->net, mask, probe);
        if (arch_part.size() != arch_len || func_part.size() != func_len)
            throw DataError("encode_zoo: encoding length mismatch");
        for (std::size_t c = 0; c < arch_len; ++c) enc.data.model_inputs.at(i, c) = arch_part[c];
        for (std::size_t c = 0; c < func_len; ++c)
            enc.data.model_inputs.at(i, arch_len + c) = func_part[c];
        enc.data.model_dataset[i] = dataset_row.at(e.dataset_id);
        enc.data.targets[i] = e.estimated_perf;
    }
    return enc;
}

LooRun run_loo(const LooConfig& cfg, std::size_t heldout_index, std::uint64_t seed) {
    const std::size_t total = cfg.family.datasets.size();
    if (total < 2) throw UsageError("run_loo: the family needs at least 2 datasets");
    if (heldout_index >= total) throw UsageError("run_loo: held-out index out of range");

    std::vector<DatasetDescriptor> all_ds(total);
    std::vector<Splits> all_splits(total);
    for (std::size_t i = 0; i < total; ++i) {
        all_ds[i] = gen_family_dataset(cfg.family, i, seed);
        all_splits[i] = make_splits(all_ds[i], seed);
    }

    SearchSpace space = cfg.space;
    space.num_classes = all_ds[0].num_classes;
    space.in_channels = all_ds[0].channels;
    space.in_h = all_ds[0].height;
    space.in_w = all_ds[0].width;
    space.validate();

    std::string run_dir;
    if (!cfg.out_dir.empty()) {
        run_dir = cfg.out_dir + "/run_" + all_ds[heldout_index].id + "_s" + std::to_string(seed);
        std::filesystem::create_directories(run_dir + "/datasets");
        std::filesystem::create_directories(run_dir + "/supernets");
        for (std::size_t i = 0; i < total; ++i)
            write_dataset(run_dir + "/datasets/" + all_ds[i].id + ".ds", all_ds[i]);
    }

    // One supernet per source dataset.
    std::vector<std::size_t> source_ix;
    for (std::size_t i = 0; i < total; ++i)
        if (i != heldout_index) source_ix.push_back(i);

    std::map<std::string, SupernetCheckpoint> checkpoints;
    std::vector<ZooSource> sources;
    for (std::size_t i : source_ix) {
        const std::string& id = all_ds[i].id;
        Rng init_rng = Rng(seed).fork(fnv1a64("supernet-init:" + id));
        SupernetCheckpoint ck;
        ck.space = space;
        ck.seed = seed;
        ck.schedule = cfg.schedule;
        ck.net = make_supernet(space, init_rng);
        ck.log = train_supernet(ck.net, space, all_ds[i], all_splits[i], cfg.schedule,
                                Rng(seed).fork(fnv1a64("supernet-train:" + id)));
        const std::string ref =
            run_dir.empty() ? "mem:" + id : std::string("supernets/") + id + ".ckpt";
        if (!run_dir.empty())
            save_supernet(run_dir + "/" + ref, ck.net, space, seed, cfg.schedule, ck.log);
        checkpoints[ref] = std::move(ck);
        sources.push_back(ZooSource{id, &checkpoints[ref].net, &all_ds[i], &all_splits[i], ref});
    }

    ZooManifest zoo =
        build_zoo(sources, space, cfg.zoo_policy, cfg.subnets_per_dataset, seed);
    if (!run_dir.empty()) save_zoo(run_dir + "/zoo.jsonl", zoo);

    const std::size_t img_dim =
        space.in_channels * space.in_h * space.in_w;
    const FrozenExtractor extractor(img_dim, cfg.extractor_hidden, cfg.feature_dim,
                                    cfg.frozen_seed);
    const FunctionalProbe probe = make_probe(cfg.probe_n, space.in_channels, space.in_h,
                                             space.in_w, cfg.frozen_seed);

    std::map<std::string, const SupernetCheckpoint*> ckpt_ptrs;
    for (const auto& [ref, ck] : checkpoints) ckpt_ptrs[ref] = &ck;
    std::map<std::string, const DatasetDescriptor*> ds_ptrs;
    for (std::size_t i : source_ix) ds_ptrs[all_ds[i].id] = &all_ds[i];

    ZooEncodings enc =
        encode_zoo(zoo, ckpt_ptrs, ds_ptrs, extractor, probe, cfg.n_img, seed);

    MetaSpaceParams meta = init_metaspace(enc.data.model_inputs.dim(1), cfg.feature_dim,
                                          cfg.metaspace, Rng(seed).fork(fnv1a64("metaspace-init")));
    meta.zoo_fingerprint = zoo.fingerprint();
    train_metaspace(meta, enc.data, Rng(seed).fork(fnv1a64("metaspace-train")));
    if (!run_dir.empty()) save_metaspace(run_dir + "/metaspace.ckpt", meta);

    ModelIndex index = build_index(meta, zoo, enc.data.model_inputs);
    if (!run_dir.empty()) save_index(run_dir + "/index.bin", index);

    // Query with the held-out dataset.
    const DatasetDescriptor& target = all_ds[heldout_index];
    Rng q_rng = Rng(seed).fork(fnv1a64("encode:" + target.id));
    const RawDatasetEncoding target_raw = encode_dataset(target, extractor, cfg.n_img, q_rng);
    Tensor target_row({1, target_raw.mean.size()});
    for (std::size_t c = 0; c < target_raw.mean.size(); ++c)
        target_row.at(0, c) = target_raw.mean[c];
    const Tensor target_emb2 = embed_datasets(meta, target_row);
    Tensor target_emb({target_emb2.dim(1)});
    for (std::size_t c = 0; c < target_emb.size(); ++c) target_emb[c] = target_emb2.at(0, c);

    std::size_t kmax = 1;
    for (std::size_t k : cfg.topk) kmax = std::max(kmax, k);
    const QueryResult q = query(index, target_emb, kmax);
    const SelectionResult sel =
        topk_select(q, zoo, ckpt_ptrs, target, all_splits[heldout_index], cfg.finetune_epochs,
                    cfg.finetune_batch, cfg.finetune_adam, seed);

    LooRun run;
    run.heldout_id = target.id;
    run.seed = seed;
    for (std::size_t k : cfg.topk) {
        const std::size_t limit = std::min(k, sel.outcomes.size());
        double best = 0.0;
        for (std::size_t i = 0; i < limit; ++i) best = std::max(best, sel.outcomes[i].val_acc);
        run.topk_acc.push_back(best);
    }
    run.t1_source = zoo.entries.at(q.ranked.front().manifest_index).dataset_id;
    run.t1_cosine = q.ranked.front().score;

    std::vector<std::pair<double, std::string>> by_fid;
    for (std::size_t s = 0; s < enc.data.dataset_ids.size(); ++s)
        by_fid.emplace_back(fid(target_raw.stats, enc.dataset_stats[s]), enc.data.dataset_ids[s]);
    std::stable_sort(by_fid.begin(), by_fid.end());
    for (const auto& [d, id] : by_fid) run.fid_order.push_back(id);
    return run;
}

LooReport eval_loo(const LooConfig& cfg, std::size_t n_seeds, std::uint64_t seed_base) {
    if (n_seeds == 0) throw UsageError("eval_loo: need at least one seed");
    LooReport report;
    report.topk = cfg.topk;
    for (std::size_t i = 0; i < cfg.family.datasets.size(); ++i)
        for (std::size_t s = 0; s < n_seeds; ++s)
            report.runs.push_back(run_loo(cfg, i, seed_base + s));
    return report;
}

std::string render_loo_table(const LooReport& report) {
    // Mean over seeds, one row per held-out dataset (first-appearance order).
    std::vector<std::string> ids;
    for (const LooRun& r : report.runs)
        if (std::find(ids.begin(), ids.end(), r.heldout_id) == ids.end())
            ids.push_back(r.heldout_id);

    std::size_t id_w = 7;  // "dataset"
    for (const std::string& id : ids) id_w = std::max(id_w, id.size());

    std::ostringstream out;
    out << std::string(id_w - 7, ' ') << "dataset";
    for (std::size_t k : report.topk) out << "      T" << k << (k < 10 ? " " : "");
    out << "\n";
    for (const std::string& id : ids) {
        std::vector<double> mean(report.topk.size(), 0.0);
        std::size_t count = 0;
        for (const LooRun& r : report.runs) {
            if (r.heldout_id != id) continue;
            for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += r.topk_acc[c];
            ++count;
        }
        out << std::string(id_w - id.size(), ' ') << id;
        for (double m : mean) out << "  " << format_acc(m / static_cast<double>(count));
        out << "\n";
    }
    return out.str();
}

std::string render_loo_csv(const LooReport& report) {
    std::ostringstream out;
    out << "dataset,seed";
    for (std::size_t k : report.topk) out << ",t" << k;
    out << ",t1_source,t1_cosine,fid_nearest\n";
    for (const LooRun& r : report.runs) {
        out << r.heldout_id << "," << r.seed;
        for (double a : r.topk_acc) out << "," << format_acc(a);
        out << "," << r.t1_source << "," << format_acc(r.t1_cosine) << ","
            << (r.fid_order.empty() ? "" : r.fid_order.front()) << "\n";
    }
    return out.str();
}

}  // namespace mednns
