// mednns command-line front end: data generation, supernet training, zoo
// construction, meta-space training, retrieval and the leave-one-out
// benchmark. Exit codes: 0 success, 1 usage, 2 data error, 3 numeric.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mednns/dataio.hpp"
#include "mednns/encoding.hpp"
#include "mednns/errors.hpp"
#include "mednns/io.hpp"
#include "mednns/metaspace.hpp"
#include "mednns/pipeline.hpp"
#include "mednns/retrieval.hpp"
#include "mednns/stats.hpp"
#include "mednns/supernet.hpp"
#include "mednns/zoo.hpp"

namespace fs = std::filesystem;
using namespace mednns;

namespace {

std::string dump_metaspace_config(const MetaSpaceConfig& cfg) {
    nlohmann::json j;
    j["embed_dim"] = cfg.embed_dim;
    j["hidden"] = cfg.hidden;
    j["beta"] = cfg.beta;
    j["sigma_fid"] = cfg.sigma_fid;
    j["lambda_perf"] = cfg.lambda_perf;
    j["lambda_rank"] = cfg.lambda_rank;
    j["lambda_fid"] = cfg.lambda_fid;
    j["lambda_contrastive"] = cfg.lambda_contrastive;
    j["contrastive_tau"] = cfg.contrastive_tau;
    j["contrastive_top_q"] = cfg.contrastive_top_q;
    j["rank_pairs_per_dataset"] = cfg.rank_pairs_per_dataset;
    j["min_rank_gap"] = cfg.min_rank_gap;
    j["epochs"] = cfg.epochs;
    j["lr"] = cfg.lr;
    return j.dump(2);
}

FamilyConfig load_family(const std::string& path) {
    if (path.empty()) return default_family();
    return parse_family_config(read_text_file(path));
}

SearchSpace load_space(const std::string& path) {
    if (path.empty()) return SearchSpace{};
    return SearchSpace::from_json(read_text_file(path));
}

// Datasets are stored one per file as <id>.ds inside a directory.
DatasetDescriptor load_dataset_by_id(const std::string& dir, const std::string& id) {
    const std::string path = dir + "/" + id + ".ds";
    if (!fs::exists(path)) throw DataError("dataset file not found: " + path);
    return read_dataset(path);
}

struct LoadedZoo {
    ZooManifest manifest;
    SearchSpace space;
    std::map<std::string, SupernetCheckpoint> checkpoints;  // by supernet_ref
    std::map<std::string, DatasetDescriptor> datasets;      // by dataset_id
    std::map<std::string, Splits> splits;
};

// Loads the manifest plus every referenced supernet checkpoint and dataset.
LoadedZoo load_zoo_context(const std::string& zoo_path, const std::string& datasets_dir) {
    LoadedZoo ctx;
    ctx.manifest = load_zoo(zoo_path);
    ctx.space = SearchSpace::from_json(ctx.manifest.space_json);
    const fs::path base = fs::path(zoo_path).parent_path();
    for (const ZooEntry& e : ctx.manifest.entries) {
        if (!ctx.checkpoints.count(e.supernet_ref)) {
            fs::path ref = e.supernet_ref;
            if (ref.is_relative() && !fs::exists(ref)) ref = base / ref;
            if (!fs::exists(ref))
                throw DataError("supernet checkpoint not found: " + e.supernet_ref);
            ctx.checkpoints[e.supernet_ref] = load_supernet(ref.string());
        }
        if (!ctx.datasets.count(e.dataset_id)) {
            ctx.datasets[e.dataset_id] = load_dataset_by_id(datasets_dir, e.dataset_id);
            ctx.splits[e.dataset_id] =
                make_splits(ctx.datasets.at(e.dataset_id), ctx.manifest.seed);
        }
    }
    return ctx;
}

std::map<std::string, const SupernetCheckpoint*> checkpoint_ptrs(const LoadedZoo& ctx) {
    std::map<std::string, const SupernetCheckpoint*> ptrs;
    for (const auto& [ref, ck] : ctx.checkpoints) ptrs[ref] = &ck;
    return ptrs;
}

std::map<std::string, const DatasetDescriptor*> dataset_ptrs(const LoadedZoo& ctx) {
    std::map<std::string, const DatasetDescriptor*> ptrs;
    for (const auto& [id, ds] : ctx.datasets) ptrs[id] = &ds;
    return ptrs;
}

void apply_losses_flag(MetaSpaceConfig& cfg, const std::string& losses) {
    cfg.lambda_perf = cfg.lambda_rank = cfg.lambda_fid = cfg.lambda_contrastive = 0.0f;
    std::stringstream ss(losses);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "perf")
            cfg.lambda_perf = 1.0f;
        else if (tok == "rank")
            cfg.lambda_rank = 1.0f;
        else if (tok == "fid")
            cfg.lambda_fid = 1.0f;
        else if (tok == "contrastive")
            cfg.lambda_contrastive = 1.0f;
        else
            throw UsageError("unknown loss '" + tok + "' (expected perf, rank, fid, contrastive)");
    }
}

void parse_policy(const std::string& policy, ZooPolicy& out_policy, std::size_t& out_count) {
    if (policy == "all") {
        out_policy = ZooPolicy::All;
        out_count = 0;
        return;
    }
    if (policy.rfind("sample:", 0) == 0) {
        out_policy = ZooPolicy::Sample;
        const std::string n = policy.substr(7);
        try {
            out_count = std::stoul(n);
        } catch (const std::exception&) {
            throw UsageError("bad sample count in --policy " + policy);
        }
        if (out_count == 0) throw UsageError("--policy sample:<n> needs n >= 1");
        return;
    }
    throw UsageError("--policy must be 'all' or 'sample:<n>'");
}

// ---- subcommand bodies ----

int cmd_gen_data(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed,
                 bool dump) {
    const FamilyConfig family = load_family(spec_path);
    if (dump) {
        std::cout << dump_family_config(family) << "\n";
        return 0;
    }
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < family.datasets.size(); ++i) {
        const DatasetDescriptor ds = gen_family_dataset(family, i, seed);
        const std::string path = out_dir + "/" + ds.id + ".ds";
        write_dataset(path, ds);
        std::cout << path << "  n=" << ds.size() << " classes=" << ds.num_classes << "\n";
    }
    return 0;
}

int cmd_train_supernet(const std::string& dataset_path, const std::string& space_path,
                       const std::string& out_path, std::uint64_t seed,
                       const TrainSchedule& schedule, bool dump) {
    SearchSpace space = load_space(space_path);
    space.validate();
    if (dump) {
        std::cout << space.to_json() << "\n";
        return 0;
    }
    const DatasetDescriptor ds = read_dataset(dataset_path);
    space.num_classes = ds.num_classes;
    space.in_channels = ds.channels;
    space.in_h = ds.height;
    space.in_w = ds.width;
    const Splits splits = make_splits(ds, seed);
    Rng init_rng = Rng(seed).fork(fnv1a64("supernet-init:" + ds.id));
    ConvNet net = make_supernet(space, init_rng);
    const TrainLog log = train_supernet(net, space, ds, splits, schedule,
                                        Rng(seed).fork(fnv1a64("supernet-train:" + ds.id)));
    save_supernet(out_path, net, space, seed, schedule, log);
    for (const EpochLog& e : log.epochs)
        std::printf("epoch %2zu  loss %.4f  train_acc %.4f  val_acc %.4f\n", e.epoch,
                    e.train_loss, e.train_acc, e.val_acc);
    std::cout << out_path << "  optimizer_steps=" << log.optimizer_steps << "\n";
    return 0;
}

int cmd_build_zoo(const std::string& supernets_dir, const std::string& datasets_dir,
                  const std::string& policy_str, const std::string& out_path,
                  std::uint64_t seed) {
    ZooPolicy policy;
    std::size_t count = 0;
    parse_policy(policy_str, policy, count);

    std::vector<std::string> ckpt_files;
    for (const auto& entry : fs::directory_iterator(supernets_dir))
        if (entry.path().extension() == ".ckpt") ckpt_files.push_back(entry.path().string());
    std::sort(ckpt_files.begin(), ckpt_files.end());
    if (ckpt_files.empty()) throw DataError("no .ckpt files in " + supernets_dir);

    std::vector<SupernetCheckpoint> ckpts;
    std::vector<DatasetDescriptor> dss;
    std::vector<Splits> splits;
    ckpts.reserve(ckpt_files.size());
    for (const std::string& path : ckpt_files) {
        ckpts.push_back(load_supernet(path));
        const std::string id = fs::path(path).stem().string();
        dss.push_back(load_dataset_by_id(datasets_dir, id));
        splits.push_back(make_splits(dss.back(), ckpts.back().seed));
    }
    const SearchSpace space = ckpts.front().space;
    std::vector<ZooSource> sources;
    for (std::size_t i = 0; i < ckpts.size(); ++i)
        sources.push_back(ZooSource{dss[i].id, &ckpts[i].net, &dss[i], &splits[i],
                                    ckpt_files[i]});
    const ZooManifest manifest = build_zoo(sources, space, policy, count, seed);
    save_zoo(out_path, manifest);
    std::cout << out_path << "  entries=" << manifest.entries.size() << "\n";
    return 0;
}

int cmd_audit_rank(const std::string& zoo_path, const std::string& datasets_dir, std::size_t k,
                   std::size_t scratch_epochs, std::size_t batch_size, float lr,
                   std::uint64_t seed, const std::string& csv_path) {
    LoadedZoo ctx = load_zoo_context(zoo_path, datasets_dir);
    std::vector<ZooSource> sources;
    std::map<std::string, std::string> ref_by_dataset;
    for (const ZooEntry& e : ctx.manifest.entries) ref_by_dataset[e.dataset_id] = e.supernet_ref;
    for (const auto& [id, ref] : ref_by_dataset)
        sources.push_back(ZooSource{id, &ctx.checkpoints.at(ref).net, &ctx.datasets.at(id),
                                    &ctx.splits.at(id), ref});
    const AdamConfig adam{lr, 0.9f, 0.999f, 1e-8f};
    const std::vector<RankAudit> audits =
        audit_rank(ctx.manifest, sources, ctx.space, k, scratch_epochs, batch_size, adam, seed);
    save_zoo(zoo_path, ctx.manifest);  // persists the filled scratch_perf fields

    std::ostringstream csv;
    csv << "dataset,k,spearman\n";
    std::cout << "  dataset    k  spearman\n";
    for (const RankAudit& a : audits) {
        const std::string rho = a.rho ? [&] {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4f", *a.rho);
            return std::string(buf);
        }() : std::string("degenerate");
        std::printf("%9s  %3zu  %s\n", a.dataset_id.c_str(), a.k, rho.c_str());
        csv << a.dataset_id << "," << a.k << "," << rho << "\n";
    }
    if (!csv_path.empty()) write_text_file(csv_path, csv.str());
    return 0;
}

int cmd_train_metaspace(const std::string& zoo_path, const std::string& datasets_dir,
                        const std::string& losses, const std::string& out_path,
                        MetaSpaceConfig cfg, std::size_t n_img, std::uint64_t frozen_seed,
                        std::size_t feature_dim, std::size_t extractor_hidden,
                        std::size_t probe_n, std::uint64_t seed, bool dump) {
    if (!losses.empty()) apply_losses_flag(cfg, losses);
    if (dump) {
        std::cout << dump_metaspace_config(cfg) << "\n";
        return 0;
    }
    LoadedZoo ctx = load_zoo_context(zoo_path, datasets_dir);
    const std::size_t img_dim = ctx.space.in_channels * ctx.space.in_h * ctx.space.in_w;
    const FrozenExtractor extractor(img_dim, extractor_hidden, feature_dim, frozen_seed);
    const FunctionalProbe probe =
        make_probe(probe_n, ctx.space.in_channels, ctx.space.in_h, ctx.space.in_w, frozen_seed);
    const ZooEncodings enc = encode_zoo(ctx.manifest, checkpoint_ptrs(ctx), dataset_ptrs(ctx),
                                        extractor, probe, n_img, seed);
    MetaSpaceParams params = init_metaspace(enc.data.model_inputs.dim(1), feature_dim, cfg,
                                            Rng(seed).fork(fnv1a64("metaspace-init")));
    params.zoo_fingerprint = ctx.manifest.fingerprint();
    const MetaTrainResult log =
        train_metaspace(params, enc.data, Rng(seed).fork(fnv1a64("metaspace-train")));
    save_metaspace(out_path, params);
    const ModelIndex index = build_index(params, ctx.manifest, enc.data.model_inputs);
    save_index(out_path + ".index", index);
    if (log.fid_skipped) std::cout << "note: FID loss skipped\n";
    std::printf("epochs=%zu  total %.6f -> %.6f  (perf %.6f  rank %.6f  fid %.6f)\n",
                log.total.size(), log.total.front(), log.total.back(), log.perf.back(),
                log.rank.back(), log.fid.back());
    std::cout << out_path << "\n" << out_path << ".index\n";
    return 0;
}

int cmd_query(const std::string& metaspace_path, const std::string& zoo_path,
              const std::string& datasets_dir, const std::string& dataset_path, std::size_t topk,
              bool finetune, std::size_t finetune_epochs, std::size_t n_img,
              std::uint64_t frozen_seed, std::size_t extractor_hidden, std::uint64_t seed,
              const std::string& csv_path) {
    const MetaSpaceParams params = load_metaspace(metaspace_path);
    const ZooManifest manifest = load_zoo(zoo_path);
    if (params.zoo_fingerprint != manifest.fingerprint())
        throw DataError("meta-space was trained against a different zoo manifest");
    const ModelIndex index = load_index(metaspace_path + ".index", manifest);
    const SearchSpace space = SearchSpace::from_json(manifest.space_json);

    const DatasetDescriptor target = read_dataset(dataset_path);
    const std::size_t img_dim = space.in_channels * space.in_h * space.in_w;
    const FrozenExtractor extractor(img_dim, extractor_hidden,
                                    params.dataset_encoder.input_dim(), frozen_seed);
    Rng enc_rng = Rng(seed).fork(fnv1a64("encode:" + target.id));
    const Tensor emb = embed_new_dataset(target, extractor, params, n_img, enc_rng);

    const QueryResult q = query(index, emb, topk);
    if (q.clamped)
        std::cerr << "warning: --topk exceeds index size, clamped to " << q.ranked.size() << "\n";

    SelectionResult sel;
    if (finetune) {
        LoadedZoo ctx = load_zoo_context(zoo_path, datasets_dir);
        const Splits target_splits = make_splits(target, seed);
        sel = topk_select(q, manifest, checkpoint_ptrs(ctx), target, target_splits,
                          finetune_epochs, 16, AdamConfig{3e-3f, 0.9f, 0.999f, 1e-8f}, seed);
    }

    std::ostringstream csv;
    csv << "rank,source,arch,cosine,estimated_perf" << (finetune ? ",val_acc" : "") << "\n";
    std::cout << "rank     source  cosine   p_hat   arch" << (finetune ? "  val_acc" : "") << "\n";
    for (std::size_t i = 0; i < q.ranked.size(); ++i) {
        const ZooEntry& e = manifest.entries.at(q.ranked[i].manifest_index);
        std::printf("%4zu %10s  %.4f  %.4f   %s", i + 1, e.dataset_id.c_str(),
                    q.ranked[i].score, e.estimated_perf, e.arch.fingerprint().c_str());
        csv << i + 1 << "," << e.dataset_id << "," << e.arch.fingerprint() << ","
            << q.ranked[i].score << "," << e.estimated_perf;
        if (finetune) {
            std::printf("  %.4f", sel.outcomes[i].val_acc);
            csv << "," << sel.outcomes[i].val_acc;
        }
        std::printf("\n");
        csv << "\n";
    }
    if (finetune) {
        const ZooEntry& best = manifest.entries.at(sel.outcomes[sel.chosen].manifest_index);
        std::printf("selected: %s %s  val_acc %.4f\n", best.dataset_id.c_str(),
                    best.arch.fingerprint().c_str(), sel.outcomes[sel.chosen].val_acc);
    }
    if (!csv_path.empty()) write_text_file(csv_path, csv.str());
    return 0;
}

int cmd_eval_loo(const std::string& family_path, std::size_t seeds, std::uint64_t seed_base,
                 LooConfig cfg, const std::string& csv_path) {
    cfg.family = load_family(family_path);
    const LooReport report = eval_loo(cfg, seeds, seed_base);
    const std::string table = render_loo_table(report);
    std::cout << table;
    if (!cfg.out_dir.empty()) write_text_file(cfg.out_dir + "/report.txt", table);
    if (!csv_path.empty()) write_text_file(csv_path, render_loo_csv(report));
    return 0;
}

int cmd_fid(const std::string& a_path, const std::string& b_path, std::size_t n_img,
            std::uint64_t frozen_seed, std::size_t extractor_hidden, std::size_t feature_dim,
            std::uint64_t seed) {
    const DatasetDescriptor a = read_dataset(a_path);
    const DatasetDescriptor b = read_dataset(b_path);
    const std::size_t img_dim = a.channels * a.height * a.width;
    if (img_dim != b.channels * b.height * b.width)
        throw DataError("fid: datasets have different image shapes");
    const FrozenExtractor extractor(img_dim, extractor_hidden, feature_dim, frozen_seed);
    // Sampling keyed by file path so a dataset compared against itself uses
    // the exact same sample and reports 0.
    Rng rng_a = Rng(seed).fork(fnv1a64("fid:" + a_path));
    Rng rng_b = Rng(seed).fork(fnv1a64("fid:" + b_path));
    const RawDatasetEncoding ea = encode_dataset(a, extractor, n_img, rng_a);
    const RawDatasetEncoding eb = encode_dataset(b, extractor, n_img, rng_b);
    std::printf("%.6f\n", fid(ea.stats, eb.stats));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mednns: supernet model zoo + meta-space model retrieval"};
    app.require_subcommand(1);
    std::size_t threads = 1;
    app.add_option("--threads", threads, "worker cap (the implementation is single-threaded)")
        ->check(CLI::PositiveNumber);

    // gen-data
    std::string gd_spec, gd_out = "data";
    std::uint64_t gd_seed = 0;
    bool gd_dump = false;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset family");
    gen->add_option("--spec", gd_spec, "family config JSON (defaults built in)");
    gen->add_option("--out", gd_out, "output directory");
    gen->add_option("--seed", gd_seed, "generation seed");
    gen->add_flag("--dump-config", gd_dump, "print the effective family config and exit");

    // train-supernet
    std::string ts_dataset, ts_space, ts_out = "supernet.ckpt";
    std::uint64_t ts_seed = 0;
    TrainSchedule ts_sched;
    bool ts_dump = false;
    auto* train = app.add_subcommand("train-supernet", "train one supernet on one dataset");
    train->add_option("--dataset", ts_dataset, "dataset file");
    train->add_option("--space", ts_space, "search space JSON (defaults built in)");
    train->add_option("--out", ts_out, "checkpoint path");
    train->add_option("--seed", ts_seed, "training seed");
    train->add_option("--stage1-epochs", ts_sched.stage1_epochs, "maximal-net epochs");
    train->add_option("--stage2-epochs", ts_sched.stage2_epochs, "fair-sampling epochs");
    train->add_option("--subnets-per-batch", ts_sched.subnets_per_batch, "subnets per batch");
    train->add_option("--batch-size", ts_sched.batch_size, "batch size");
    train->add_option("--lr", ts_sched.adam.lr, "Adam learning rate");
    train->add_flag("--dump-config", ts_dump, "print the effective search space and exit");

    // build-zoo
    std::string bz_supernets, bz_datasets = "data", bz_policy = "all", bz_out = "zoo.jsonl";
    std::uint64_t bz_seed = 0;
    auto* zoo = app.add_subcommand("build-zoo", "extract subnets and estimate performance");
    zoo->add_option("--supernets", bz_supernets, "directory of <dataset>.ckpt files")->required();
    zoo->add_option("--datasets", bz_datasets, "directory of <dataset>.ds files");
    zoo->add_option("--policy", bz_policy, "all | sample:<n>");
    zoo->add_option("--out", bz_out, "manifest path");
    zoo->add_option("--seed", bz_seed, "sampling seed");

    // audit-rank
    std::string ar_zoo, ar_datasets = "data", ar_csv;
    std::size_t ar_k = 16, ar_epochs = 5, ar_batch = 16;
    float ar_lr = 3e-3f;
    std::uint64_t ar_seed = 0;
    auto* audit = app.add_subcommand("audit-rank", "scratch-train vs inherited rank audit");
    audit->add_option("--zoo", ar_zoo, "zoo manifest")->required();
    audit->add_option("--datasets", ar_datasets, "directory of <dataset>.ds files");
    audit->add_option("--k", ar_k, "architectures audited per dataset");
    audit->add_option("--scratch-epochs", ar_epochs, "scratch training epochs");
    audit->add_option("--batch-size", ar_batch, "scratch batch size");
    audit->add_option("--lr", ar_lr, "scratch Adam learning rate");
    audit->add_option("--seed", ar_seed, "scratch init seed");
    audit->add_option("--csv", ar_csv, "also write the report as CSV");

    // train-metaspace
    std::string tm_zoo, tm_datasets = "data", tm_losses, tm_out = "metaspace.ckpt";
    MetaSpaceConfig tm_cfg;
    std::size_t tm_nimg = 256, tm_fdim = 32, tm_hidden = 64, tm_probe = 8;
    std::uint64_t tm_frozen = 99, tm_seed = 0;
    bool tm_dump = false;
    auto* meta = app.add_subcommand("train-metaspace", "train the joint meta-space on a zoo");
    meta->add_option("--zoo", tm_zoo, "zoo manifest");
    meta->add_option("--datasets", tm_datasets, "directory of <dataset>.ds files");
    meta->add_option("--losses", tm_losses, "subset of perf,rank,fid,contrastive");
    meta->add_option("--out", tm_out, "checkpoint path (index written alongside)");
    meta->add_option("--epochs", tm_cfg.epochs, "training epochs");
    meta->add_option("--lr", tm_cfg.lr, "Adam learning rate");
    meta->add_option("--embed-dim", tm_cfg.embed_dim, "embedding dimension");
    meta->add_option("--beta", tm_cfg.beta, "rank-loss scale");
    meta->add_option("--sigma-fid", tm_cfg.sigma_fid, "FID bandwidth (<=0: median pairwise)");
    meta->add_option("--n-img", tm_nimg, "images sampled per dataset encoding");
    meta->add_option("--frozen-seed", tm_frozen, "frozen extractor / probe seed");
    meta->add_option("--feature-dim", tm_fdim, "frozen extractor output dim");
    meta->add_option("--extractor-hidden", tm_hidden, "frozen extractor hidden width");
    meta->add_option("--probe-n", tm_probe, "functional probe batch size");
    meta->add_option("--seed", tm_seed, "training seed");
    meta->add_flag("--dump-config", tm_dump, "print the effective meta-space config and exit");

    // query
    std::string q_meta, q_zoo, q_datasets = "data", q_dataset, q_csv;
    std::size_t q_topk = 5, q_ft_epochs = 1;
    std::size_t q_nimg = 256, q_hidden = 64;
    std::uint64_t q_frozen = 99, q_seed = 0;
    bool q_finetune = false;
    auto* qr = app.add_subcommand("query", "retrieve models for an unseen dataset");
    qr->add_option("--metaspace", q_meta, "meta-space checkpoint")->required();
    qr->add_option("--zoo", q_zoo, "zoo manifest the meta-space was trained on")->required();
    qr->add_option("--datasets", q_datasets, "directory of <dataset>.ds files (for --finetune)");
    qr->add_option("--dataset", q_dataset, "query dataset file")->required();
    qr->add_option("--topk", q_topk, "candidates to return");
    qr->add_flag("--finetune", q_finetune, "run the fine-tune-and-select protocol");
    qr->add_option("--finetune-epochs", q_ft_epochs, "fine-tune epochs per candidate");
    qr->add_option("--n-img", q_nimg, "images sampled for the query encoding");
    qr->add_option("--frozen-seed", q_frozen, "frozen extractor seed (must match training)");
    qr->add_option("--extractor-hidden", q_hidden, "frozen extractor hidden width");
    qr->add_option("--seed", q_seed, "query/fine-tune seed");
    qr->add_option("--csv", q_csv, "also write the ranked table as CSV");

    // eval-loo
    std::string el_family, el_csv;
    std::size_t el_seeds = 1;
    std::uint64_t el_base = 0;
    LooConfig el_cfg;
    auto* loo = app.add_subcommand("eval-loo", "leave-one-dataset-out transfer benchmark");
    loo->add_option("--family", el_family, "family config JSON (defaults built in)");
    loo->add_option("--seeds", el_seeds, "seeds per held-out dataset");
    loo->add_option("--seed-base", el_base, "first seed value");
    loo->add_option("--subnets", el_cfg.subnets_per_dataset, "zoo subnets per source dataset");
    loo->add_option("--metaspace-epochs", el_cfg.metaspace.epochs, "meta-space epochs");
    loo->add_option("--out", el_cfg.out_dir, "artifact directory (checkpoints, manifests)");
    loo->add_option("--csv", el_csv, "also write per-run rows as CSV");

    // fid
    std::string fa, fb;
    std::size_t f_nimg = 256, f_hidden = 64, f_fdim = 32;
    std::uint64_t f_frozen = 99, f_seed = 0;
    auto* fd = app.add_subcommand("fid", "Frechet distance between two dataset files");
    fd->add_option("--a", fa, "first dataset file")->required();
    fd->add_option("--b", fb, "second dataset file")->required();
    fd->add_option("--n-img", f_nimg, "images sampled per dataset");
    fd->add_option("--frozen-seed", f_frozen, "frozen extractor seed");
    fd->add_option("--extractor-hidden", f_hidden, "frozen extractor hidden width");
    fd->add_option("--feature-dim", f_fdim, "frozen extractor output dim");
    fd->add_option("--seed", f_seed, "sampling seed");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen_data(gd_spec, gd_out, gd_seed, gd_dump);
        if (train->parsed()) {
            if (!ts_dump && ts_dataset.empty())
                throw UsageError("train-supernet: --dataset is required");
            return cmd_train_supernet(ts_dataset, ts_space, ts_out, ts_seed, ts_sched, ts_dump);
        }
        if (zoo->parsed()) return cmd_build_zoo(bz_supernets, bz_datasets, bz_policy, bz_out,
                                                bz_seed);
        if (audit->parsed())
            return cmd_audit_rank(ar_zoo, ar_datasets, ar_k, ar_epochs, ar_batch, ar_lr, ar_seed,
                                  ar_csv);
        if (meta->parsed()) {
            if (!tm_dump && tm_zoo.empty())
                throw UsageError("train-metaspace: --zoo is required");
            return cmd_train_metaspace(tm_zoo, tm_datasets, tm_losses, tm_out, tm_cfg, tm_nimg,
                                       tm_frozen, tm_fdim, tm_hidden, tm_probe, tm_seed, tm_dump);
        }
        if (qr->parsed())
            return cmd_query(q_meta, q_zoo, q_datasets, q_dataset, q_topk, q_finetune,
                             q_ft_epochs, q_nimg, q_frozen, q_hidden, q_seed, q_csv);
        if (loo->parsed()) return cmd_eval_loo(el_family, el_seeds, el_base, el_cfg, el_csv);
        if (fd->parsed())
            return cmd_fid(fa, fb, f_nimg, f_frozen, f_hidden, f_fdim, f_seed);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
}
