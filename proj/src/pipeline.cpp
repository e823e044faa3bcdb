#include "lexsig/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "lexsig/analysis.hpp"
#include "lexsig/corpus.hpp"
#include "lexsig/error.hpp"
#include "lexsig/io.hpp"
#include "lexsig/ngram.hpp"
#include "lexsig/score_records.hpp"
#include "lexsig/signatures.hpp"
#include "lexsig/svg.hpp"
#include "lexsig/trajectory.hpp"
#include "lexsig/wordbank.hpp"

namespace lexsig {

namespace fs = std::filesystem;

const char* stage_name(Stage s) {
    switch (s) {
    case Stage::sample: return "sample";
    case Stage::score: return "score";
    case Stage::signatures: return "signatures";
    case Stage::aoa: return "aoa";
    case Stage::analyze: return "analyze";
    }
    return "?";
}

std::string stage_hash(const Config& cfg, Stage s) {
    std::vector<std::string> prefixes{"corpus", "words", "sample"};
    if (s >= Stage::score) prefixes.insert(prefixes.end(), {"backend", "checkpoints", "run.seeds"});
    if (s >= Stage::signatures) prefixes.push_back("signatures");
    if (s >= Stage::aoa) prefixes.push_back("aoa");
    if (s >= Stage::analyze) prefixes.push_back("analysis");
    return cfg.hash(prefixes);
}

std::string header_line(const Config& cfg, Stage s) {
    return "# lexsig config_hash=" + stage_hash(cfg, s) + " stage=" + stage_name(s);
}

void check_header(const fs::path& path, const Config& cfg, Stage s) {
    if (!fs::exists(path))
        throw Error(ErrorCode::stage_mismatch,
                    path.string() + " missing; run the " + std::string(stage_name(s)) + " stage first");
    const auto got = read_header_comment(path);
    const auto want = header_line(cfg, s);
    if (got != want)
        throw Error(ErrorCode::stage_mismatch, path.string() + " was written under a different config (header '" +
                                                   got + "', expected '" + want + "')");
}

fs::path output_dir(const Config& cfg) {
    const auto p = cfg.get_path("output.dir");
    return p.empty() ? fs::path("lexsig_out") : p;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (i < failed_at) failed_at = i, failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string safe_file_name(const std::string& word) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char c : word) {
        if (std::isalnum(c) || c == '-' || c == '_') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out.empty() ? "%" : out;
}

namespace {

std::size_t workers(const Config& cfg) { return static_cast<std::size_t>(std::max<std::int64_t>(1, cfg.get_int("run.workers", 1))); }

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
    TokenSeq t{std::to_string(base), tag};
    return std::stoull(context_id(t), nullptr, 16);
}

void require_file(const Config& cfg, const std::string& key, bool required) {
    const auto p = cfg.get_path(key);
    if (p.empty()) {
        if (required) throw Error(ErrorCode::usage, "config key '" + key + "' is required");
        return;
    }
    if (!fs::exists(p)) throw Error(ErrorCode::usage, "config key '" + key + "': " + p.string() + " does not exist");
}

std::vector<std::int64_t> seeds(const Config& cfg) { return cfg.get_int_list("run.seeds", {0}); }

std::size_t sample_size(const Config& cfg, const char* key) {
    return static_cast<std::size_t>(cfg.get_int(std::string("sample.") + key, 100));
}

std::vector<SignatureKind> enabled_kinds(const Config& cfg) {
    std::vector<SignatureKind> out;
    if (!cfg.has("signatures.kinds")) {
        out.assign(all_signature_kinds().begin(), all_signature_kinds().end());
        return out;
    }
    for (const auto& label : cfg.get_string_list("signatures.kinds", {})) out.push_back(parse_signature_label(label));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double kind_epsilon(const Config& cfg, SignatureKind k) {
    const double eps = cfg.get_double("aoa.epsilon." + signature_label(k), cfg.get_double("aoa.epsilon", 0.07));
    if (!(eps > 0.0)) throw Error(ErrorCode::usage, "epsilon must be > 0");
    return eps;
}

std::vector<double> epsilon_grid(const Config& cfg) {
    auto grid = cfg.get_double_list("aoa.epsilons", {0.03, 0.05, 0.07, 0.10, 0.15});
    for (double e : grid)
        if (!(e > 0.0)) throw Error(ErrorCode::usage, "epsilon grid values must be > 0");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

template <class Fn>
void write_output(const fs::path& path, const Config& cfg, Stage s, Fn&& body) {
    fs::create_directories(path.parent_path());
    write_file_atomic(path, [&](std::ostream& out) {
        out << header_line(cfg, s) << '\n';
        body(out);
    });
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

std::string kind_file_tag(SignatureKind k) {
    return std::string(family_name(k.family)) + "_" + signature_polarity_name(k.polarity);
}

// ---------------------------------------------------------------- samples

struct SampleSet {
    std::vector<std::string> words;
    std::map<std::string, ContextSample> positive;
    std::map<std::string, ContextSample> negative;
    ContextSample marginal;
    std::map<std::string, TokenSeq> contexts;  // sidecar
    bool union_all = false;

    // The sample feeding signatures of polarity `p` for `word`.
    std::vector<ContextEntry> contexts_for(const std::string& word, SignaturePolarity p) const {
        switch (p) {
        case SignaturePolarity::positive: return positive.at(word).contexts;
        case SignaturePolarity::negative: return negative.at(word).contexts;
        case SignaturePolarity::all: break;
        }
        if (!union_all) return marginal.contexts;
        std::map<TokenSeq, std::size_t> merged;
        for (const auto& e : positive.at(word).contexts) merged[e.context] += e.count;
        for (const auto& e : negative.at(word).contexts) merged[e.context] += e.count;
        std::vector<ContextEntry> out;
        for (auto& [c, n] : merged) out.push_back({c, n});
        return out;
    }

    // Every distinct context scored for `word`, keyed by id.
    std::map<std::string, TokenSeq> scored_contexts(const std::string& word) const {
        std::map<std::string, TokenSeq> out;
        for (const auto* s : {&positive.at(word), &negative.at(word), &marginal})
            for (const auto& e : s->contexts) out.emplace(context_id(e.context), e.context);
        return out;
    }
};

fs::path samples_dir(const Config& cfg) { return output_dir(cfg) / "samples"; }

fs::path sample_path(const Config& cfg, const std::string& word, Polarity p) {
    return samples_dir(cfg) / (safe_file_name(word) + "." + polarity_name(p) + ".jsonl");
}

std::string all_contexts_mode(const Config& cfg) {
    const auto mode = cfg.get_string("sample.all_contexts", "marginal");
    if (mode != "marginal" && mode != "union")
        throw Error(ErrorCode::usage, "sample.all_contexts must be 'marginal' or 'union'");
    return mode;
}

ContextSample read_single_sample(const fs::path& path, const Config& cfg, Polarity p, const std::string& word) {
    check_header(path, cfg, Stage::sample);
    auto samples = read_context_samples(path);
    if (samples.empty()) {
        // a sample with no contexts writes no lines
        ContextSample s;
        s.word = word;
        s.polarity = p;
        return s;
    }
    if (samples.size() != 1 || samples[0].polarity != p || samples[0].word != word)
        throw Error(ErrorCode::format, path.string() + ": expected one " + polarity_name(p) + " sample for '" + word + "'");
    return samples[0];
}

SampleSet load_samples(const Config& cfg) {
    SampleSet set;
    set.union_all = all_contexts_mode(cfg) == "union";
    const auto dir = samples_dir(cfg);
    check_header(dir / "words.txt", cfg, Stage::sample);
    set.words = read_word_list(dir / "words.txt");
    for (const auto& w : set.words) {
        set.positive[w] = read_single_sample(sample_path(cfg, w, Polarity::positive), cfg, Polarity::positive, w);
        set.negative[w] = read_single_sample(sample_path(cfg, w, Polarity::negative), cfg, Polarity::negative, w);
    }
    set.marginal = read_single_sample(dir / "marginal.jsonl", cfg, Polarity::marginal, "");
    check_header(dir / "contexts.jsonl", cfg, Stage::sample);
    set.contexts = read_context_sidecar(dir / "contexts.jsonl");
    return set;
}

// --------------------------------------------------------------- features

std::map<std::string, WordFeatures> read_features(const fs::path& path) {
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto cw = t.column("word"), cc = t.column("count"), cl = t.column("log_frequency"), cm = t.column("mlu"),
               cn = t.column("n_chars");
    std::map<std::string, WordFeatures> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const auto ln = t.line_numbers[i];
        WordFeatures f;
        f.word = r[cw];
        f.count = static_cast<std::size_t>(parse_int(r[cc], src, ln));
        f.log_frequency = r[cl].empty() ? -INFINITY : parse_double(r[cl], src, ln);
        if (!r[cm].empty()) f.mlu = parse_double(r[cm], src, ln);
        f.n_chars = static_cast<std::size_t>(parse_int(r[cn], src, ln));
        out[f.word] = f;
    }
    return out;
}

std::map<std::string, double> read_concreteness(const fs::path& path) {
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto cw = t.column("word"), cc = t.column("concreteness");
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i][cc].empty()) continue;
        const double v = parse_double(t.rows[i][cc], src, t.line_numbers[i]);
        if (v < 1.0 || v > 5.0) throw FormatError(src, t.line_numbers[i], "concreteness outside [1,5]");
        out[t.rows[i][cw]] = v;
    }
    return out;
}

// ----------------------------------------------------------------- scores

struct ShardInfo {
    std::int64_t seed = 0;
    std::int64_t step = 0;
    std::int64_t total_steps = 0;
};

fs::path scores_dir(const Config& cfg) { return output_dir(cfg) / "scores"; }

fs::path shard_path(const Config& cfg, std::int64_t seed, std::int64_t step) {
    return scores_dir(cfg) / ("seed" + std::to_string(seed) + "_step" + std::to_string(step) + ".jsonl");
}

std::vector<ShardInfo> read_checkpoints(const Config& cfg) {
    const auto path = scores_dir(cfg) / "checkpoints.csv";
    check_header(path, cfg, Stage::score);
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto cs = t.column("seed"), ct = t.column("step"), cT = t.column("total_steps");
    std::vector<ShardInfo> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        out.push_back({parse_int(t.rows[i][cs], src, t.line_numbers[i]), parse_int(t.rows[i][ct], src, t.line_numbers[i]),
                       parse_int(t.rows[i][cT], src, t.line_numbers[i])});
    return out;
}

double clamp_log(double x) { return std::min(0.0, x); }

// Scores every (word, context) pair of one checkpoint into records.
std::vector<std::string> score_checkpoint(const SampleSet& samples, const Scorer& q,
                                          const std::map<TripleKey, double>* reference, std::int64_t step,
                                          std::int64_t seed, std::size_t n_workers) {
    std::map<std::string, double> ctx_log_prob;
    if (q.scores_context_prob())
        for (const auto& [id, toks] : samples.contexts) ctx_log_prob[id] = clamp_log(q.log_prob_context(toks));
    std::vector<std::string> per_word(samples.words.size());
    parallel_for(samples.words.size(), n_workers, [&](std::size_t i) {
        const auto& w = samples.words[i];
        std::string buf;
        for (const auto& [id, toks] : samples.scored_contexts(w)) {
            ScoreRecord r;
            r.word = w;
            r.context_id = id;
            r.step = step;
            r.seed = seed;
            r.log_q = clamp_log(q.log_prob_word(w, toks));
            if (auto it = ctx_log_prob.find(id); it != ctx_log_prob.end()) r.log_q_c = it->second;
            if (reference) r.log_r = reference->at({w, id});
            buf += format_score_record(r);
            buf += '\n';
        }
        per_word[i] = std::move(buf);
    });
    return per_word;
}

void write_shard(const Config& cfg, std::int64_t seed, std::int64_t step, const std::vector<std::string>& chunks) {
    write_output(shard_path(cfg, seed, step), cfg, Stage::score, [&](std::ostream& out) {
        for (const auto& c : chunks) out << c;
    });
}

void write_checkpoints(const Config& cfg, const std::vector<ShardInfo>& shards) {
    write_output(scores_dir(cfg) / "checkpoints.csv", cfg, Stage::score, [&](std::ostream& out) {
        write_csv_row(out, {"seed", "step", "total_steps"});
        for (const auto& s : shards)
            write_csv_row(out, {std::to_string(s.seed), std::to_string(s.step), std::to_string(s.total_steps)});
    });
}

NgramConfig ngram_config(const Config& cfg) {
    NgramConfig nc;
    nc.order = static_cast<std::size_t>(cfg.get_int("backend.order", 3));
    nc.smoothing = parse_smoothing(cfg.get_string("backend.smoothing", "interpolated_add_k"));
    nc.k = cfg.get_double("backend.k", 0.1);
    nc.discount = cfg.get_double("backend.discount", 0.75);
    if (nc.order < 1) throw Error(ErrorCode::usage, "backend.order must be >= 1");
    return nc;
}

std::vector<std::int64_t> checkpoint_schedule(const Config& cfg, std::int64_t total) {
    if (cfg.has("checkpoints.schedule")) return cfg.get_int_list("checkpoints.schedule", {});
    const auto count = static_cast<std::size_t>(cfg.get_int("checkpoints.count", 20));
    return geometric_schedule(total, count, cfg.get_double("checkpoints.first_fraction", 0.001));
}

void score_ngram(const Config& cfg, const SampleSet& samples) {
    const auto train = Corpus::load(cfg.get_path("corpus.train"));
    const auto nc = ngram_config(cfg);
    const auto schedule = checkpoint_schedule(cfg, static_cast<std::int64_t>(train.total_tokens()));
    const auto n_workers = workers(cfg);

    std::optional<std::map<TripleKey, double>> reference;
    if (cfg.get_bool("backend.reference", true)) {
        NgramConfig rc = nc;
        rc.order = static_cast<std::size_t>(cfg.get_int("backend.reference_order", 4));
        rc.k = cfg.get_double("backend.reference_k", 0.01);
        const auto ref_path = cfg.get_path("backend.reference_corpus");
        const auto ref_model = NgramModel::train_batch(ref_path.empty() ? train : Corpus::load(ref_path), rc);
        reference.emplace();
        for (const auto& w : samples.words)
            for (const auto& [id, toks] : samples.scored_contexts(w))
                (*reference)[{w, id}] = clamp_log(ref_model.log_prob_word(w, toks));
    }

    std::vector<ShardInfo> shards;
    for (auto seed : seeds(cfg)) {
        spdlog::info("score: training seed {} over {} checkpoints", seed, schedule.size());
        train_ngram_streaming(train, nc, schedule, static_cast<std::uint64_t>(seed), [&](const NgramModel& model) {
            const auto step = static_cast<std::int64_t>(model.counts().positions);
            write_shard(cfg, seed, step,
                        score_checkpoint(samples, model, reference ? &*reference : nullptr, step, seed, n_workers));
            shards.push_back({seed, step, schedule.back()});
        });
    }
    write_checkpoints(cfg, shards);
}

void score_file(const Config& cfg, const SampleSet& samples) {
    const auto store = load_score_records(cfg.get_path("backend.path"));
    auto ids = store.checkpoints();
    if (cfg.has("run.seeds")) {
        const auto wanted = seeds(cfg);
        std::erase_if(ids, [&](const CheckpointId& id) {
            return std::find(wanted.begin(), wanted.end(), id.seed) == wanted.end();
        });
    }
    if (ids.empty()) throw Error(ErrorCode::missing_triple, "score file has no checkpoints for the configured seeds");
    std::map<std::int64_t, std::int64_t> total;
    for (const auto& id : ids) total[id.seed] = std::max(total[id.seed], id.step);

    std::vector<std::string> missing;
    bool warned_reference = false;
    std::vector<ShardInfo> shards;
    for (const auto& id : ids) {
        const auto scorer = store.scorer(id);
        if (!scorer->scores_reference() && !warned_reference) {
            spdlog::warn("score file lacks log_r at seed {} step {}; reference signatures will be skipped", id.seed, id.step);
            warned_reference = true;
        }
        std::vector<std::string> chunks;
        for (const auto& w : samples.words) {
            std::string buf;
            for (const auto& [cid, toks] : samples.scored_contexts(w)) {
                if (!scorer->has_triple(w, toks)) {
                    missing.push_back(w + "," + cid + "," + std::to_string(id.step) + "," + std::to_string(id.seed));
                    continue;
                }
                ScoreRecord r;
                r.word = w;
                r.context_id = cid;
                r.step = id.step;
                r.seed = id.seed;
                try {
                    r.log_q = scorer->log_prob_word(w, toks);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::capability_missing) throw;
                }
                if (scorer->scores_context_prob()) r.log_q_c = scorer->log_prob_context(toks);
                r.log_r = scorer->log_prob_reference(w, toks);
                if (!r.log_q && !r.log_r) {
                    missing.push_back(w + "," + cid + "," + std::to_string(id.step) + "," + std::to_string(id.seed));
                    continue;
                }
                buf += format_score_record(r) + "\n";
            }
            chunks.push_back(std::move(buf));
        }
        if (missing.empty()) write_shard(cfg, id.seed, id.step, chunks);
        shards.push_back({id.seed, id.step, total[id.seed]});
    }
    if (!missing.empty()) {
        write_output(scores_dir(cfg) / "missing_triples.csv", cfg, Stage::score, [&](std::ostream& out) {
            out << "word,context_id,step,seed\n";
            for (const auto& m : missing) out << m << '\n';
        });
        std::string head;
        for (std::size_t i = 0; i < missing.size() && i < 5; ++i) head += "\n  " + missing[i];
        throw Error(ErrorCode::missing_triple, std::to_string(missing.size()) + " (word, context, step, seed) triples missing "
                                               "from the score file; full list in " +
                                                   (scores_dir(cfg) / "missing_triples.csv").string() + head);
    }
    write_checkpoints(cfg, shards);
}

// -------------------------------------------------------------- aoa files

fs::path aoa_dir(const Config& cfg) { return output_dir(cfg) / "aoa"; }

std::vector<AggregatedAoA> read_aggregated(const fs::path& path) {
    const auto t = read_csv(path);
    const auto src = path.string();
    const auto cw = t.column("word"), cf = t.column("family"), cp = t.column("polarity"), ca = t.column("aoa"),
               cs = t.column("seeds");
    std::vector<AggregatedAoA> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const auto ln = t.line_numbers[i];
        AggregatedAoA a;
        a.word = r[cw];
        a.kind = {parse_family(r[cf]), parse_signature_polarity(r[cp])};
        a.aoa = parse_double(r[ca], src, ln);
        a.seeds = static_cast<std::size_t>(parse_int(r[cs], src, ln));
        out.push_back(a);
    }
    return out;
}

}  // namespace

void validate_config(const Config& cfg, Stage s) {
    if (s == Stage::sample) {
        require_file(cfg, "corpus.train", true);
        require_file(cfg, "corpus.test", false);
        require_file(cfg, "words.targets", true);
        for (const char* k : {"positive", "negative", "marginal"})
            if (cfg.get_int(std::string("sample.") + k, 100) < 1)
                throw Error(ErrorCode::usage, std::string("sample.") + k + " must be >= 1");
        if (cfg.get_int("corpus.max_context_len", 64) < 1) throw Error(ErrorCode::usage, "corpus.max_context_len must be >= 1");
        all_contexts_mode(cfg);
    }
    if (s == Stage::score) {
        const auto kind = cfg.get_string("backend.kind", "ngram");
        if (kind == "ngram") {
            require_file(cfg, "corpus.train", true);
            require_file(cfg, "backend.reference_corpus", false);
            ngram_config(cfg);
        } else if (kind == "score_file") {
            require_file(cfg, "backend.path", true);
        } else {
            throw Error(ErrorCode::usage, "backend.kind must be 'ngram' or 'score_file'");
        }
        if (cfg.has("run.seeds") && seeds(cfg).empty()) throw Error(ErrorCode::usage, "run.seeds must not be empty");
    }
    if (s == Stage::signatures) enabled_kinds(cfg);
    if (s == Stage::aoa) {
        if (cfg.get_int("aoa.window", 3) < 1 || cfg.get_int("aoa.window", 3) % 2 == 0)
            throw Error(ErrorCode::usage, "aoa.window must be odd and >= 1");
        if (cfg.get_int("aoa.min_tail", 2) < 1) throw Error(ErrorCode::usage, "aoa.min_tail must be >= 1");
        epsilon_grid(cfg);
        for (auto k : all_signature_kinds()) kind_epsilon(cfg, k);
    }
    if (s == Stage::analyze) {
        require_file(cfg, "analysis.wordbank", false);
        require_file(cfg, "analysis.exclusions", false);
        require_file(cfg, "analysis.concreteness", false);
    }
}

// ------------------------------------------------------------------ stages

void run_sample(const Config& cfg) {
    validate_config(cfg, Stage::sample);
    const auto train = Corpus::load(cfg.get_path("corpus.train"));
    const auto test_path = cfg.get_path("corpus.test");
    const auto source = test_path.empty() ? train : Corpus::load(test_path);
    const auto max_len = static_cast<std::size_t>(cfg.get_int("corpus.max_context_len", 64));
    const auto m_pos = sample_size(cfg, "positive"), m_neg = sample_size(cfg, "negative"),
               m_marg = sample_size(cfg, "marginal");
    const auto base_seed = static_cast<std::uint64_t>(cfg.get_int("sample.seed", 0));
    const auto min_types = static_cast<std::size_t>(cfg.get_int("words.min_types", static_cast<std::int64_t>(m_pos)));
    if (min_types < 1) throw Error(ErrorCode::usage, "words.min_types must be >= 1");

    std::vector<std::string> targets;
    std::set<std::string> seen;
    for (const auto& w : read_word_list(cfg.get_path("words.targets")))
        if (seen.insert(w).second) targets.push_back(w);

    const auto filter = filter_vocabulary(targets, source, min_types, max_len);
    spdlog::info("sample: {} of {} target words retained (min {} positive types)", filter.retained.size(),
                 targets.size(), min_types);
    const auto dir = samples_dir(cfg);
    fs::create_directories(dir);

    std::vector<ContextSample> pos(filter.retained.size()), neg(filter.retained.size());
    parallel_for(filter.retained.size(), workers(cfg), [&](std::size_t i) {
        const auto& w = filter.retained[i];
        pos[i] = sample_positive_contexts(source, w, m_pos, max_len, derive_seed(base_seed, "positive:" + w));
        neg[i] = sample_negative_contexts(source, w, m_neg, max_len, derive_seed(base_seed, "negative:" + w));
    });
    const auto marg = sample_marginal_contexts(source, m_marg, max_len, derive_seed(base_seed, "marginal"));

    std::map<std::string, TokenSeq> sidecar;
    auto note = [&](const ContextSample& s) {
        for (const auto& e : s.contexts) sidecar.emplace(context_id(e.context), e.context);
    };
    for (std::size_t i = 0; i < filter.retained.size(); ++i) {
        const auto& w = filter.retained[i];
        write_output(sample_path(cfg, w, Polarity::positive), cfg, Stage::sample,
                     [&](std::ostream& out) { write_context_sample(out, pos[i]); });
        write_output(sample_path(cfg, w, Polarity::negative), cfg, Stage::sample,
                     [&](std::ostream& out) { write_context_sample(out, neg[i]); });
        note(pos[i]);
        note(neg[i]);
    }
    note(marg);
    write_output(dir / "marginal.jsonl", cfg, Stage::sample, [&](std::ostream& out) { write_context_sample(out, marg); });
    write_output(dir / "contexts.jsonl", cfg, Stage::sample, [&](std::ostream& out) {
        for (const auto& [id, toks] : sidecar) write_context_entry(out, toks);
    });
    write_output(dir / "words.txt", cfg, Stage::sample, [&](std::ostream& out) {
        for (const auto& w : filter.retained) out << w << '\n';
    });
    write_output(dir / "vocabulary_report.csv", cfg, Stage::sample, [&](std::ostream& out) {
        write_csv_row(out, {"word", "positive_types", "status"});
        std::map<std::string, std::size_t> excluded(filter.excluded.begin(), filter.excluded.end());
        for (const auto& w : targets) {
            if (auto it = excluded.find(w); it != excluded.end())
                write_csv_row(out, {w, std::to_string(it->second), "excluded"});
            else
                write_csv_row(out, {w, std::to_string(positive_context_types(source, w, max_len).size()), "retained"});
        }
    });
    write_output(dir / "sample_report.csv", cfg, Stage::sample, [&](std::ostream& out) {
        write_csv_row(out, {"word", "polarity", "types", "capacity", "insufficient_types"});
        auto row = [&](const ContextSample& s) {
            write_csv_row(out, {s.word, polarity_name(s.polarity), std::to_string(s.contexts.size()),
                                std::to_string(s.capacity), s.insufficient_types ? "true" : "false"});
        };
        for (std::size_t i = 0; i < pos.size(); ++i) row(pos[i]), row(neg[i]);
        row(marg);
    });

    const auto freqs = count_frequencies(train);
    write_output(output_dir(cfg) / "features.csv", cfg, Stage::sample, [&](std::ostream& out) {
        write_csv_row(out, {"word", "count", "log_frequency", "mlu", "n_chars"});
        for (const auto& w : filter.retained) {
            const auto f = corpus_features(train, freqs, w);
            write_csv_row(out, {w, std::to_string(f.count), std::isfinite(f.log_frequency) ? format_double(f.log_frequency) : "",
                                f.mlu ? format_double(*f.mlu) : "", std::to_string(f.n_chars)});
        }
    });
}

void run_score(const Config& cfg) {
    validate_config(cfg, Stage::score);
    const auto samples = load_samples(cfg);
    fs::create_directories(scores_dir(cfg));
    // stale shards from an earlier schedule would otherwise be read back
    for (const auto& e : fs::directory_iterator(scores_dir(cfg)))
        if (e.path().extension() == ".jsonl" || e.path().filename() == "missing_triples.csv") fs::remove(e.path());
    if (cfg.get_string("backend.kind", "ngram") == "ngram")
        score_ngram(cfg, samples);
    else
        score_file(cfg, samples);
}

void run_signatures(const Config& cfg) {
    validate_config(cfg, Stage::signatures);
    const auto samples = load_samples(cfg);
    const auto shards = read_checkpoints(cfg);
    const auto kinds = enabled_kinds(cfg);

    std::vector<SignatureValue> values;
    std::set<Family> skipped;
    std::mutex mu;
    for (const auto& shard : shards) {
        const auto path = shard_path(cfg, shard.seed, shard.step);
        check_header(path, cfg, Stage::score);
        std::map<TripleKey, ScoreValues> scores;
        for_each_data_line(path, [&](std::size_t ln, const std::string& line) {
            const auto r = parse_score_record(line, path.string(), ln);
            scores[{r.word, r.context_id}] = {r.log_q, r.log_q_c, r.log_r};
        });
        std::vector<std::vector<SignatureValue>> per_word(samples.words.size());
        parallel_for(samples.words.size(), workers(cfg), [&](std::size_t i) {
            const auto& w = samples.words[i];
            for (const auto& kind : kinds) {
                std::vector<ContextScore> cs;
                bool capable = true;
                for (const auto& e : samples.contexts_for(w, kind.polarity)) {
                    auto it = scores.find({w, context_id(e.context)});
                    if (it == scores.end())
                        throw Error(ErrorCode::missing_triple, path.string() + ": no score for '" + w + "' in context [" +
                                                                   join_tokens(e.context) + "]");
                    const auto& v = it->second;
                    const bool ok = kind.family == Family::reference ? v.log_q && v.log_r
                                    : kind.family == Family::intrinsic ? v.log_q && v.log_q_c
                                                                       : v.log_q.has_value();
                    if (!ok) {
                        capable = false;
                        break;
                    }
                    cs.push_back({*v.log_q, v.log_q_c, v.log_r, 1.0});
                }
                if (!capable) {
                    std::lock_guard lock(mu);
                    skipped.insert(kind.family);
                    continue;
                }
                if (cs.empty()) continue;
                per_word[i].push_back({w, kind, shard.step, shard.seed, estimate_signature(kind, cs)});
            }
        });
        for (auto& v : per_word) values.insert(values.end(), v.begin(), v.end());
    }
    for (auto f : skipped)
        spdlog::warn("signatures: scores lack the fields the {} family needs; those signatures were skipped", family_name(f));

    std::sort(values.begin(), values.end(), [](const SignatureValue& a, const SignatureValue& b) {
        return std::tie(a.seed, a.step, a.word, a.kind) < std::tie(b.seed, b.step, b.word, b.kind);
    });
    write_output(output_dir(cfg) / "signatures.csv", cfg, Stage::signatures, [&](std::ostream& out) {
        write_signature_header(out);
        for (const auto& v : values) write_signature_row(out, v);
    });
    write_output(output_dir(cfg) / "signature_diagnostics.csv", cfg, Stage::signatures, [&](std::ostream& out) {
        write_csv_row(out, {"word", "family", "polarity", "step", "seed", "weight_entropy", "dropped"});
        for (const auto& v : values)
            write_csv_row(out, {v.word, family_name(v.kind.family), signature_polarity_name(v.kind.polarity),
                                std::to_string(v.step), std::to_string(v.seed),
                                v.estimate.weight_entropy ? format_double(*v.estimate.weight_entropy) : "",
                                std::to_string(v.estimate.dropped)});
    });
}

void run_aoa(const Config& cfg) {
    validate_config(cfg, Stage::aoa);
    const auto sig_path = output_dir(cfg) / "signatures.csv";
    check_header(sig_path, cfg, Stage::signatures);
    const auto trajs = build_trajectories(read_signatures(sig_path));
    const auto window = static_cast<std::size_t>(cfg.get_int("aoa.window", 3));
    const auto min_tail = static_cast<std::size_t>(cfg.get_int("aoa.min_tail", 2));
    const bool smooth = cfg.get_bool("aoa.smooth", true);
    const auto grid = epsilon_grid(cfg);

    std::vector<Trajectory> smoothed;
    for (const auto& t : trajs) smoothed.push_back(smooth ? smooth_moving_average(t, window) : t);

    std::vector<AoAResult> results;
    std::map<SignatureKind, std::vector<AoAResult>> at_default;
    for (const auto& t : smoothed) {
        auto eps_list = grid;
        const double eps_k = kind_epsilon(cfg, t.kind);
        if (std::find(eps_list.begin(), eps_list.end(), eps_k) == eps_list.end()) eps_list.push_back(eps_k);
        std::sort(eps_list.begin(), eps_list.end());
        for (double eps : eps_list) {
            auto r = extract_aoa_cauchy(t, eps, min_tail);
            r.window = smooth ? window : 1;
            if (eps == eps_k) at_default[t.kind].push_back(r);
            results.push_back(std::move(r));
        }
    }

    const auto dir = aoa_dir(cfg);
    write_output(dir / "trajectories.csv", cfg, Stage::aoa, [&](std::ostream& out) { write_trajectories(out, trajs); });
    write_output(dir / "trajectories_smoothed.csv", cfg, Stage::aoa,
                 [&](std::ostream& out) { write_trajectories(out, smoothed); });
    write_output(dir / "aoa.csv", cfg, Stage::aoa, [&](std::ostream& out) {
        write_aoa_header(out);
        for (const auto& r : results) write_aoa_row(out, r);
    });
    write_output(dir / "aoa_aggregated.csv", cfg, Stage::aoa, [&](std::ostream& out) {
        write_csv_row(out, {"word", "family", "polarity", "epsilon", "aoa", "seeds"});
        for (const auto& [kind, rs] : at_default)
            for (const auto& a : aggregate_seeds(rs).values)
                write_csv_row(out, {a.word, family_name(kind.family), signature_polarity_name(kind.polarity),
                                    format_double(kind_epsilon(cfg, kind)), format_double(a.aoa), std::to_string(a.seeds)});
    });
    write_output(dir / "aoa_excluded.csv", cfg, Stage::aoa, [&](std::ostream& out) {
        write_csv_row(out, {"word", "family", "polarity", "epsilon"});
        for (const auto& [kind, rs] : at_default)
            for (const auto& [w, k] : aggregate_seeds(rs).excluded)
                write_csv_row(out, {w, family_name(k.family), signature_polarity_name(k.polarity),
                                    format_double(kind_epsilon(cfg, k))});
    });
}

void run_analyze(const Config& cfg) {
    validate_config(cfg, Stage::analyze);
    const auto out_dir = output_dir(cfg);
    const auto report = out_dir / "report";
    const auto adir = aoa_dir(cfg);
    for (const char* f : {"aoa.csv", "aoa_aggregated.csv", "trajectories_smoothed.csv"}) check_header(adir / f, cfg, Stage::aoa);
    check_header(out_dir / "features.csv", cfg, Stage::sample);

    const auto aoa_rows = read_aoa(adir / "aoa.csv");
    const auto aggregated = read_aggregated(adir / "aoa_aggregated.csv");
    const auto smoothed = read_trajectories(adir / "trajectories_smoothed.csv");
    auto features = read_features(out_dir / "features.csv");
    const auto grid = epsilon_grid(cfg);

    // Restrict to words with child norms when a wordbank is configured.
    std::optional<WordbankLoad> wb;
    std::map<std::string, double> child;
    std::vector<std::string> never;
    if (const auto p = cfg.get_path("analysis.wordbank"); !p.empty()) {
        wb = load_wordbank(p, cfg.get_path("analysis.exclusions"));
        child = child_aoa_all(wb->table, cfg.get_double("analysis.child_threshold", 0.5),
                              cfg.get_bool("analysis.child_interpolate", true), &never);
        for (auto& [w, f] : features)
            if (auto it = wb->table.words.find(w); it != wb->table.words.end()) f.lexical_category = it->second.lexical_category;
    }
    if (const auto p = cfg.get_path("analysis.concreteness"); !p.empty())
        for (const auto& [w, c] : read_concreteness(p))
            if (auto it = features.find(w); it != features.end()) it->second.concreteness = c;
    auto in_scope = [&](const std::string& w) { return features.count(w) && (!wb || wb->table.contains(w)); };

    std::map<SignatureKind, WordValues> by_kind;
    for (const auto& a : aggregated)
        if (in_scope(a.word)) by_kind[a.kind][a.word] = a.aoa;
    WordValues child_vals;
    for (const auto& [w, v] : child)
        if (features.count(w)) child_vals[w] = v;
    std::vector<SignatureKind> kinds;
    for (const auto& [k, v] : by_kind) kinds.push_back(k);

    // child correlation bars
    std::vector<std::pair<std::string, double>> bars;
    write_output(report / "child_correlation.csv", cfg, Stage::analyze, [&](std::ostream& out) {
        write_csv_row(out, {"signature", "family", "polarity", "pearson_r", "n_words"});
        for (auto k : all_signature_kinds()) {
            std::vector<double> a, b;
            if (by_kind.count(k))
                for (const auto& [w, v] : by_kind.at(k))
                    if (auto it = child_vals.find(w); it != child_vals.end()) a.push_back(it->second), b.push_back(v);
            std::optional<double> r;
            try {
                if (a.size() >= 3) r = pearson(a, b);
            } catch (const Error&) {
            }
            if (r) bars.emplace_back(signature_label(k), *r);
            write_csv_row(out, {signature_label(k), family_name(k.family), signature_polarity_name(k.polarity),
                                r ? format_double(*r) : "", std::to_string(a.size())});
        }
    });
    write_text(report / "child_correlation.svg", svg_bar_chart("Pearson r with child AoA", bars));

    // signature correlation matrix
    std::vector<std::pair<std::string, WordValues>> vectors;
    if (!child_vals.empty()) vectors.emplace_back("Children", child_vals);
    for (auto k : kinds) vectors.emplace_back(signature_label(k), by_kind.at(k));
    const auto sig_matrix = correlation_matrix(vectors, 3);
    write_output(report / "signature_correlation.csv", cfg, Stage::analyze,
                 [&](std::ostream& out) { write_correlation_csv(out, sig_matrix); });
    write_text(report / "signature_correlation.svg", svg_heatmap("AoA correlation between signatures", sig_matrix.labels, sig_matrix.r));

    // epsilon grid correlations, per kind
    for (auto k : kinds) {
        std::vector<AoAResult> rows;
        for (const auto& r : aoa_rows)
            if (r.kind == k && in_scope(r.word)) rows.push_back(r);
        std::vector<std::pair<std::string, WordValues>> eps_vectors;
        for (double eps : grid) {
            std::vector<AoAResult> at;
            for (const auto& r : rows)
                if (r.epsilon == eps) at.push_back(r);
            WordValues v;
            for (const auto& a : aggregate_seeds(at).values) v[a.word] = a.aoa;
            eps_vectors.emplace_back("eps=" + format_double(eps), v);
        }
        const auto m = correlation_matrix(eps_vectors, 3);
        write_output(report / ("epsilon_correlation_" + kind_file_tag(k) + ".csv"), cfg, Stage::analyze,
                     [&](std::ostream& out) { write_correlation_csv(out, m); });
    }

    // non-convergence sweep and monotonicity
    std::vector<Trajectory> scoped;
    for (const auto& t : smoothed)
        if (in_scope(t.word)) scoped.push_back(t);
    const auto sweep = convergence_sweep(scoped, grid, static_cast<std::size_t>(cfg.get_int("aoa.min_tail", 2)));
    std::map<SignatureKind, SvgSeries> sweep_series;
    write_output(report / "nonconvergence.csv", cfg, Stage::analyze, [&](std::ostream& out) {
        write_csv_row(out, {"signature", "family", "polarity", "epsilon", "words", "non_converged", "fraction"});
        for (const auto& c : sweep) {
            write_csv_row(out, {signature_label(c.kind), family_name(c.kind.family), signature_polarity_name(c.kind.polarity),
                                format_double(c.epsilon), std::to_string(c.words), std::to_string(c.non_converged),
                                format_double(c.fraction_non_converged)});
            auto& s = sweep_series[c.kind];
            s.name = signature_label(c.kind);
            s.points.emplace_back(c.epsilon, 100.0 * c.fraction_non_converged);
        }
    });
    std::vector<SvgSeries> series;
    for (auto& [k, s] : sweep_series) series.push_back(s);
    write_text(report / "nonconvergence.svg", svg_line_chart("Words not converged in every seed", "epsilon", "% words", series));

    // counter-trend steps smaller than epsilon are noise under the convergence criterion too
    const double mono_tol = cfg.get_double("analysis.monotone_tolerance", cfg.get_double("aoa.epsilon", 0.07));
    write_output(report / "monotone.csv", cfg, Stage::analyze, [&](std::ostream& out) {
        write_csv_row(out, {"signature", "family", "polarity", "trajectories", "monotone", "fraction"});
        std::map<SignatureKind, std::pair<std::size_t, std::size_t>> counts;
        for (const auto& t : scoped) {
            auto& c = counts[t.kind];
            ++c.first;
            c.second += is_monotone(t.values(), mono_tol) ? 1 : 0;
        }
        for (const auto& [k, c] : counts)
            write_csv_row(out, {signature_label(k), family_name(k.family), signature_polarity_name(k.polarity),
                                std::to_string(c.first), std::to_string(c.second),
                                format_double(static_cast<double>(c.second) / static_cast<double>(c.first))});
    });

    // first and last acquired words
    const auto list_size = static_cast<std::size_t>(cfg.get_int("analysis.list_size", 10));
    write_output(report / "first_last_words.csv", cfg, Stage::analyze, [&](std::ostream& out) {
        write_csv_row(out, {"signature", "family", "polarity", "rank", "first_word", "first_aoa", "last_word", "last_aoa"});
        for (auto k : kinds) {
            std::vector<std::pair<double, std::string>> order;
            for (const auto& [w, v] : by_kind.at(k)) order.emplace_back(v, w);
            std::sort(order.begin(), order.end());
            const std::size_t n = std::min(list_size, order.size());
            for (std::size_t i = 0; i < n; ++i) {
                const auto& first = order[i];
                const auto& last = order[order.size() - 1 - i];
                write_csv_row(out, {signature_label(k), family_name(k.family), signature_polarity_name(k.polarity),
                                    std::to_string(i + 1), first.second, format_double(first.first), last.second,
                                    format_double(last.first)});
            }
        }
    });

    // regression table
    PredictorSuiteOptions opts;
    opts.outlier_mad = cfg.get_double("analysis.outlier_mad", 3.0);
    opts.min_words = static_cast<std::size_t>(cfg.get_int("analysis.min_words", 30));
    opts.standardize = cfg.get_bool("analysis.standardize", false);
    opts.vif_limit = cfg.get_double("analysis.vif_limit", 5.0);
    std::vector<PredictorSuiteRow> rows;
    nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
    auto try_row = [&](const std::string& label, const WordValues& aoa) {
        try {
            rows.push_back(predictor_suite(label, aoa, features, opts));
        } catch (const Error& e) {
            spdlog::warn("analyze: regression row {} skipped: {}", label, e.what());
            skipped.push_back({{"aoa_type", label}, {"reason", e.what()}});
        }
    };
    if (!child_vals.empty()) try_row("Children", child_vals);
    for (auto k : kinds) try_row(signature_label(k), by_kind.at(k));
    nlohmann::ordered_json reg;
    reg["config_hash"] = stage_hash(cfg, Stage::analyze);
    reg["rows"] = nlohmann::ordered_json::parse(regression_json(rows));
    reg["skipped"] = skipped;
    write_text(report / "regression.json", reg.dump(2) + "\n");
    write_text(report / "regression.txt", header_line(cfg, Stage::analyze) + "\n" + format_regression_table(rows));

    nlohmann::ordered_json summary;
    summary["config_hash"] = stage_hash(cfg, Stage::analyze);
    summary["words_with_features"] = features.size();
    if (wb) {
        summary["wordbank_words"] = wb->table.words.size();
        summary["wordbank_excluded"] = wb->excluded;
        summary["never_acquired"] = never;
    }
    nlohmann::ordered_json per_kind;
    for (auto k : kinds) {
        per_kind[signature_label(k)] = {{"epsilon", kind_epsilon(cfg, k)}, {"converged_words", by_kind.at(k).size()}};
    }
    summary["signatures"] = per_kind;
    write_text(report / "summary.json", summary.dump(2) + "\n");
    spdlog::info("analyze: report written to {}", report.string());
}

void run_all(const Config& cfg) {
    run_sample(cfg);
    run_score(cfg);
    run_signatures(cfg);
    run_aoa(cfg);
    run_analyze(cfg);
}

}  // namespace lexsig
