// Command-line front end for the whole pipeline: puzzle corpora, prompt
// rendering, plan scoring, toy-backend rollouts with activation dumps,
// representation extraction, interventions and the final t-test tables.
//
// Exit codes: 0 success, 2 usage error, 3 missing input, 4 format error.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frr/blocksworld.hpp"
#include "frr/naming.hpp"
#include "frr/prompt.hpp"
#include "frr/replab.hpp"
#include "frr/stats.hpp"
#include "frr/steering.hpp"
#include "frr/toy_backend.hpp"
#include "frr/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace frr;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMissingInput = 3;
constexpr int kExitFormat = 4;

struct MissingInput : std::runtime_error {
    explicit MissingInput(const std::string& path)
        : std::runtime_error("missing input: " + path) {}
};
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& why) : std::runtime_error("format error: " + why) {}
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_input(const std::string& path) {
    if (!fs::exists(path)) throw MissingInput(path);
    std::ifstream f(path);
    if (!f) throw MissingInput(path);
    return f;
}

std::ofstream open_output(const std::string& path) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output: " + path);
    return f;
}

// Default output directory prefix, applied to relative --out paths.
std::string resolve_out(const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    if (const char* dir = std::getenv("FRR_OUT_DIR"); dir && *dir)
        return (fs::path(dir) / path).string();
    return path;
}

json parse_json_line(const std::string& line, const std::string& what) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw FormatError(what + ": " + e.what());
    }
}

std::vector<json> read_json_lines(const std::string& path) {
    auto f = open_input(path);
    std::vector<json> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        out.push_back(parse_json_line(line, path));
    }
    return out;
}

obf::Naming naming_by_id(int id) {
    if (id == 0) return obf::identity_naming();
    return obf::builtin_naming(id);
}

obf::TemplateKind template_kind(const std::string& name) {
    if (name == "standard") return obf::TemplateKind::Standard;
    if (name == "mystery") return obf::TemplateKind::Mystery;
    throw CLI::ValidationError("--template", "must be standard or mystery");
}

std::vector<Concept> concept_set(const std::string& name) {
    if (name == "actions")
        return {kActionConcepts.begin(), kActionConcepts.end()};
    if (name == "predicates")
        return {kPredicateConcepts.begin(), kPredicateConcepts.end()};
    if (name == "all") return {kAllConcepts.begin(), kAllConcepts.end()};
    throw CLI::ValidationError("--set", "must be actions, predicates or all");
}

// ---- corpora ----

int cmd_gen(int n_blocks, int count, uint64_t seed, const std::string& out) {
    auto f = open_output(out);
    for (int i = 0; i < count; ++i) {
        bw::Puzzle p = bw::generate_puzzle(n_blocks, seed + static_cast<uint64_t>(i));
        f << bw::puzzle_to_json(p).dump() << "\n";
    }
    return 0;
}

std::vector<bw::Puzzle> load_puzzles(const std::string& path) {
    std::vector<bw::Puzzle> out;
    for (const auto& j : read_json_lines(path)) {
        try {
            out.push_back(bw::puzzle_from_json(j));
        } catch (const std::exception& e) {
            throw FormatError(path + ": " + e.what());
        }
    }
    return out;
}

int cmd_render(const std::string& puzzles_path, int naming_id, const std::string& tmpl,
               bool no_swap, const std::string& out) {
    auto puzzles = load_puzzles(puzzles_path);
    obf::Naming naming = naming_by_id(naming_id);
    obf::PromptTemplate t{template_kind(tmpl), !no_swap};
    auto f = open_output(out);
    for (size_t i = 0; i < puzzles.size(); ++i) {
        json row = {{"index", i},
                    {"naming", naming_id},
                    {"prompt", obf::render_prompt(puzzles[i], naming, t)}};
        f << row.dump() << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& puzzles_path, const std::string& plans_path,
               const std::string& out) {
    auto puzzles = load_puzzles(puzzles_path);
    auto plan_rows = read_json_lines(plans_path);
    if (plan_rows.size() != puzzles.size())
        throw FormatError("puzzle/plan line counts differ (" + std::to_string(puzzles.size()) +
                          " vs " + std::to_string(plan_rows.size()) + ")");
    auto f = open_output(out);
    for (size_t i = 0; i < puzzles.size(); ++i) {
        bw::Plan plan;
        try {
            plan = bw::plan_from_json(plan_rows[i]);
        } catch (const std::exception& e) {
            throw FormatError(plans_path + " line " + std::to_string(i + 1) + ": " + e.what());
        }
        json row = bw::verdict_to_json(bw::verify_plan(puzzles[i], plan));
        row["index"] = i;
        f << row.dump() << "\n";
    }
    return 0;
}

bool score_answer(const bw::Puzzle& puzzle, const obf::Naming& naming, const std::string& text) {
    try {
        return bw::verify_plan(puzzle, obf::parse_plan(text, naming)).valid();
    } catch (const std::exception&) {
        return false;  // unparseable answers count as incorrect
    }
}

// Answers: JSON lines {"puzzle": index, "naming": id, "text": "..."}.
int cmd_score(const std::string& puzzles_path, const std::string& answers_path,
              const std::string& out) {
    auto puzzles = load_puzzles(puzzles_path);
    std::map<int, std::pair<int, int>> tally;  // naming -> (correct, total)
    for (const auto& row : read_json_lines(answers_path)) {
        int idx, nid;
        std::string text;
        try {
            idx = row.at("puzzle").get<int>();
            nid = row.at("naming").get<int>();
            text = row.at("text").get<std::string>();
        } catch (const json::exception& e) {
            throw FormatError(answers_path + ": " + e.what());
        }
        if (idx < 0 || idx >= static_cast<int>(puzzles.size()))
            throw FormatError("answer references puzzle " + std::to_string(idx));
        bool ok = score_answer(puzzles[idx], naming_by_id(nid), text);
        auto& t = tally[nid];
        t.first += ok ? 1 : 0;
        t.second += 1;
    }
    auto f = open_output(out);
    f << "naming,correct,total,accuracy\n";
    for (const auto& [nid, t] : tally) {
        double acc = t.second ? static_cast<double>(t.first) / t.second : 0.0;
        f << nid << "," << t.first << "," << t.second << "," << fmt_double(acc) << "\n";
    }
    return 0;
}

// ---- backend plumbing ----

toy::ToyConfig backend_config(const json& j) {
    toy::ToyConfig cfg;
    cfg.vocab = j.value("vocab", cfg.vocab);
    cfg.layers = j.value("layers", cfg.layers);
    cfg.dim = j.value("dim", cfg.dim);
    cfg.heads = j.value("heads", cfg.heads);
    cfg.context = j.value("context", cfg.context);
    cfg.seed = j.value("seed", cfg.seed);
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw FormatError(std::string("backend config: ") + e.what());
    }
    return cfg;
}

struct Manifest {
    toy::ToyConfig backend;
    std::vector<bw::Puzzle> puzzles;
    std::vector<int> naming_ids;
    obf::PromptTemplate prompt;
    bool statement_only = false;  // short prompts (statement block only)
    int max_new = 16;
    std::vector<std::pair<std::string, steer::SteeringSpec>> specs;
};

steer::ConceptVectors load_table_csv(const std::string& path) {
    auto f = open_input(path);
    steer::ConceptVectors table;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream in(line);
        std::string cell;
        std::getline(in, cell, ',');
        Concept c = concept_from_name(cell);
        std::getline(in, cell, ',');  // n_sequences, unused here
        std::vector<double> vals;
        while (std::getline(in, cell, ',')) vals.push_back(std::stod(cell));
        table[c] = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    }
    if (table.empty()) throw FormatError("empty table: " + path);
    return table;
}

Manifest load_manifest(const std::string& path) {
    auto f = open_input(path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    Manifest m;
    try {
        m.backend = backend_config(j.value("backend", json::object()));
        const auto& pz = j.at("puzzles");
        int n_blocks = pz.value("n_blocks", 4);
        int count = pz.at("count").get<int>();
        uint64_t seed = pz.value("seed", 0ULL);
        for (int i = 0; i < count; ++i)
            m.puzzles.push_back(bw::generate_puzzle(n_blocks, seed + static_cast<uint64_t>(i)));
        m.naming_ids = j.at("namings").get<std::vector<int>>();
        m.prompt.kind = template_kind(j.value("template", "mystery"));
        m.prompt.relational_swap = j.value("relational_swap", true);
        m.statement_only = j.value("statement_only", false);
        m.max_new = j.value("max_new", 16);
        for (const auto& sj : j.value("specs", json::array())) {
            steer::SteeringSpec spec = steer::spec_from_json(sj);
            if (spec.table.empty() && sj.contains("table_csv"))
                spec.table = load_table_csv(sj.at("table_csv").get<std::string>());
            m.specs.emplace_back(sj.value("name", steer::vector_kind_name(spec.kind)), spec);
        }
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    for (int nid : m.naming_ids) naming_by_id(nid);  // validates ids
    for (const auto& [name, spec] : m.specs) {
        try {
            spec.validate(m.backend.dim);
        } catch (const std::exception& e) {
            throw FormatError("spec \"" + name + "\": " + e.what());
        }
    }
    return m;
}

std::string manifest_prompt(const Manifest& m, const bw::Puzzle& p, const obf::Naming& naming) {
    if (!m.statement_only) return obf::render_prompt(p, naming, m.prompt);
    return obf::render_statement(p, naming, m.prompt) + "\nMy plan is as follows:\n[PLAN]\n";
}

// Rollouts: one greedy generation per (naming, puzzle), activation dump per
// cell written under out/naming_<id>/puzzle_<i>.
int cmd_rollout(const std::string& manifest_path, const std::string& out_dir, int jobs) {
    Manifest m = load_manifest(manifest_path);
    toy::ToyBackend backend(m.backend);
    struct Cell {
        int nid, pidx;
    };
    std::vector<Cell> cells;
    for (int nid : m.naming_ids)
        for (size_t i = 0; i < m.puzzles.size(); ++i)
            cells.push_back({nid, static_cast<int>(i)});
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) break;
            const Cell& c = cells[idx];
            obf::Naming naming = naming_by_id(c.nid);
            std::string prompt = manifest_prompt(m, m.puzzles[c.pidx], naming);
            auto [text, rec] = backend.generate_greedy(prompt, m.max_new, nullptr);
            fs::path dir = fs::path(out_dir) / ("naming_" + std::to_string(c.nid)) /
                           ("puzzle_" + std::to_string(c.pidx));
            trace::write_dump(toy::to_dump(rec, m.backend), dir);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return 0;
}

// ---- representation extraction ----

int cmd_extract(const std::vector<std::string>& dump_dirs, int layer, int timestamp, int window,
                int naming_id, const std::string& set_name, bool centered,
                const std::string& out) {
    std::vector<trace::ActivationDump> dumps;
    for (const auto& dir : dump_dirs) {
        if (!fs::exists(dir)) throw MissingInput(dir);
        dumps.push_back(trace::read_dump(dir));
    }
    rep::Batch batch;
    for (const auto& d : dumps) batch.push_back(&d);
    obf::Naming naming = naming_by_id(naming_id);
    rep::ExtractionSpec spec{layer, timestamp, window};

    std::map<Concept, std::pair<Eigen::VectorXd, int>> rows;
    for (Concept c : concept_set(set_name)) {
        auto r = rep::extract(batch, spec, c, naming.word(c));
        rows[c] = {r.vec, r.num_sequences};
    }
    if (centered) {
        rep::ConceptVectors raw;
        for (const auto& [c, rv] : rows) raw[c] = rv.first;
        auto cent = rep::center(raw);
        for (auto& [c, rv] : rows) rv.first = cent.at(c);
    }
    auto f = open_output(out);
    f << "concept,n_sequences,values...\n";
    for (const auto& [c, rv] : rows) {
        f << concept_name(c) << "," << rv.second;
        for (Eigen::Index i = 0; i < rv.first.size(); ++i) f << "," << fmt_double(rv.first[i]);
        f << "\n";
    }
    return 0;
}

// Curves manifest: {"dumps": {"<naming>": [dirs]}, "reference": {layer,
// timestamp, window}, "stride": n, "window": w, "set": "actions"}.
int cmd_curves(const std::string& manifest_path, const std::string& out) {
    auto mf = open_input(manifest_path);
    json j;
    try {
        j = json::parse(mf);
    } catch (const json::exception& e) {
        throw FormatError(manifest_path + ": " + e.what());
    }
    std::map<int, std::vector<trace::ActivationDump>> storage;
    std::map<int, rep::Batch> batches;
    std::map<int, obf::Naming> namings;
    try {
        for (const auto& [key, dirs] : j.at("dumps").items()) {
            int nid = std::stoi(key);
            namings.emplace(nid, naming_by_id(nid));
            for (const auto& dj : dirs) {
                std::string dir = dj.get<std::string>();
                if (!fs::exists(dir)) throw MissingInput(dir);
                storage[nid].push_back(trace::read_dump(dir));
            }
        }
        for (auto& [nid, ds] : storage)
            for (auto& d : ds) batches[nid].push_back(&d);

        const auto& rj = j.at("reference");
        rep::ExtractionSpec ref_spec{rj.at("layer").get<int>(), rj.at("timestamp").get<int>(),
                                     rj.at("window").get<int>()};
        auto concepts = concept_set(j.value("set", "actions"));
        int ref_naming = rj.value("naming", namings.begin()->first);
        auto reference = rep::extract_centered_table(batches.at(ref_naming), ref_spec,
                                                     namings.at(ref_naming), concepts);
        if (!reference) throw FormatError("reference window has no occurrences");
        auto curve = rep::convergence_curve(batches, namings, *reference,
                                            ref_spec.layer, j.value("stride", rep::kDefaultStride),
                                            j.value("window", rep::kDefaultWindow));
        auto f = open_output(out);
        f << "timestamp,concept,same_sim,cross_sim,n_namings\n";
        for (const auto& p : curve)
            f << p.timestamp << "," << concept_name(p.concept_) << "," << fmt_double(p.same_sim)
              << "," << fmt_double(p.cross_sim) << "," << p.n_namings << "\n";
    } catch (const json::exception& e) {
        throw FormatError(manifest_path + ": " + e.what());
    }
    return 0;
}

int cmd_pca(const std::string& points_path, int k, const std::string& out) {
    auto f = open_input(points_path);
    std::vector<Eigen::VectorXd> points;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream in(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(in, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError(points_path + ": non-numeric cell \"" + cell + "\"");
            }
        }
        points.emplace_back(
            Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
    }
    rep::PcaResult r = rep::pca_project(points, k);
    auto of = open_output(out);
    of << "kind,index,values...\n";
    for (int i = 0; i < k; ++i) of << "ratio," << i << "," << fmt_double(r.ratios[i]) << "\n";
    for (Eigen::Index i = 0; i < r.coordinates.rows(); ++i) {
        of << "coordinate," << i;
        for (int c = 0; c < k; ++c) of << "," << fmt_double(r.coordinates(i, c));
        of << "\n";
    }
    return 0;
}

// ---- intervention runner ----

struct CellResult {
    std::string condition;
    int naming;
    int puzzle;
    bool correct;
    size_t touches;
    std::string text;
};

int run_experiment(const std::string& manifest_path, const std::string& out_dir, int jobs,
                   bool shuffled_control) {
    Manifest m = load_manifest(manifest_path);
    toy::ToyBackend backend(m.backend);

    struct Cell {
        int spec_idx;  // -1 = baseline
        int nid, pidx;
    };
    std::vector<Cell> cells;
    for (int nid : m.naming_ids)
        for (size_t p = 0; p < m.puzzles.size(); ++p) {
            cells.push_back({-1, nid, static_cast<int>(p)});
            for (size_t s = 0; s < m.specs.size(); ++s)
                cells.push_back({static_cast<int>(s), nid, static_cast<int>(p)});
        }

    std::vector<CellResult> results(cells.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) break;
            const Cell& c = cells[idx];
            obf::Naming naming = naming_by_id(c.nid);
            const bw::Puzzle& puzzle = m.puzzles[c.pidx];
            std::string prompt = manifest_prompt(m, puzzle, naming);
            CellResult r;
            r.naming = c.nid;
            r.puzzle = c.pidx;
            if (c.spec_idx < 0) {
                r.condition = "baseline";
                r.text = backend.generate(prompt, m.max_new, nullptr);
                r.touches = 0;
            } else {
                const auto& [name, spec0] = m.specs[c.spec_idx];
                r.condition = name;
                steer::SteeringSpec spec = spec0;
                if (shuffled_control) spec.table = steer::shuffle_table(spec.table, spec.seed);
                auto res = steer::run_intervention(backend, prompt, spec, naming.words(),
                                                   m.max_new);
                r.text = std::move(res.text);
                r.touches = res.touches.size();
            }
            std::string full = prompt + r.text + "\n[PLAN END]";
            r.correct = score_answer(puzzle, naming, full);
            results[idx] = std::move(r);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    fs::create_directories(out_dir);
    {
        auto f = open_output((fs::path(out_dir) / "ledger.csv").string());
        f << "condition,naming,puzzle,correct,touches\n";
        for (const auto& r : results)
            f << r.condition << "," << r.naming << "," << r.puzzle << "," << (r.correct ? 1 : 0)
              << "," << r.touches << "\n";
    }
    {
        // per-(condition, naming) accuracy summary
        std::map<std::pair<std::string, int>, std::pair<int, int>> tally;
        for (const auto& r : results) {
            auto& t = tally[{r.condition, r.naming}];
            t.first += r.correct ? 1 : 0;
            t.second += 1;
        }
        auto f = open_output((fs::path(out_dir) / "accuracy.csv").string());
        f << "condition,naming,correct,total,accuracy\n";
        for (const auto& [key, t] : tally)
            f << key.first << "," << key.second << "," << t.first << "," << t.second << ","
              << fmt_double(static_cast<double>(t.first) / t.second) << "\n";
    }
    return 0;
}

// ---- stats ----

int cmd_stats(const std::string& ledger_path, const std::string& out) {
    auto f = open_input(ledger_path);
    std::string line;
    std::getline(f, line);
    if (line.rfind("condition,naming,puzzle,correct", 0) != 0)
        throw FormatError("unexpected ledger header: " + line);
    std::map<std::string, std::map<int, std::pair<int, int>>> tally;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream in(line);
        std::string cond, nid_s, pid_s, correct_s;
        std::getline(in, cond, ',');
        std::getline(in, nid_s, ',');
        std::getline(in, pid_s, ',');
        std::getline(in, correct_s, ',');
        if (cond.empty() || nid_s.empty() || correct_s.empty())
            throw FormatError("short ledger row: " + line);
        try {
            auto& t = tally[cond][std::stoi(nid_s)];
            t.first += std::stoi(correct_s) ? 1 : 0;
            t.second += 1;
        } catch (const std::exception&) {
            throw FormatError("bad ledger row: " + line);
        }
    }
    if (!tally.count("baseline")) throw FormatError("ledger has no baseline condition");
    std::map<int, double> baseline;
    for (const auto& [nid, t] : tally.at("baseline"))
        baseline[nid] = static_cast<double>(t.first) / t.second;

    auto of = open_output(out);
    of << "condition,n,mean,se,t,p,sig\n";
    for (const auto& [cond, per_naming] : tally) {
        if (cond == "baseline") continue;
        std::map<int, double> acc;
        for (const auto& [nid, t] : per_naming)
            acc[nid] = static_cast<double>(t.first) / t.second;
        stats::DeltaSample deltas = stats::summarize(baseline, acc);
        of << cond << "," << deltas.values.size() << ",";
        try {
            stats::TestResult r = stats::one_sample_t(deltas);
            of << fmt_double(r.mean) << "," << fmt_double(r.se) << "," << fmt_double(r.t) << ","
               << fmt_double(r.p) << "," << stats::significance_stars(r.p) << "\n";
        } catch (const stats::ZeroVariance&) {
            double mean = 0.0;
            for (double v : deltas.values) mean += v;
            mean /= static_cast<double>(deltas.values.size());
            of << fmt_double(mean) << ",0,,,degenerate\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BlocksWorld reasoning-representation pipeline"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a seeded puzzle corpus (JSON lines)");
    int gen_blocks = 4, gen_count = 1;
    uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--blocks", gen_blocks, "number of blocks")->capture_default_str();
    gen->add_option("--count", gen_count, "number of puzzles")->capture_default_str();
    gen->add_option("--seed", gen_seed, "base seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output file")->required();

    // render
    auto* render = app.add_subcommand("render", "Render prompts for a puzzle corpus");
    std::string r_puzzles, r_tmpl = "mystery", r_out;
    int r_naming = 1;
    bool r_noswap = false;
    render->add_option("--puzzles", r_puzzles)->required();
    render->add_option("--naming", r_naming, "naming id (0 = canonical words)")
        ->capture_default_str();
    render->add_option("--template", r_tmpl, "standard | mystery")->capture_default_str();
    render->add_flag("--no-relational-swap", r_noswap,
                     "render the naming table's relational roles verbatim");
    render->add_option("--out", r_out)->required();

    // verify
    auto* verify = app.add_subcommand("verify", "Verify canonical plans against puzzles");
    std::string v_puzzles, v_plans, v_out;
    verify->add_option("--puzzles", v_puzzles)->required();
    verify->add_option("--plans", v_plans, "JSON lines, one plan array per puzzle")->required();
    verify->add_option("--out", v_out)->required();

    // score
    auto* score = app.add_subcommand("score", "Score model answer texts per naming");
    std::string s_puzzles, s_answers, s_out;
    score->add_option("--puzzles", s_puzzles)->required();
    score->add_option("--answers", s_answers,
                      "JSON lines {puzzle, naming, text}; unparseable answers count wrong")
        ->required();
    score->add_option("--out", s_out)->required();

    // rollout
    auto* rollout = app.add_subcommand("rollout", "Toy-backend rollouts with activation dumps");
    std::string ro_manifest, ro_out;
    int ro_jobs = 1;
    rollout->add_option("--manifest", ro_manifest)->required();
    rollout->add_option("--out", ro_out, "dump directory root")->required();
    rollout->add_option("--jobs", ro_jobs)->capture_default_str();

    // extract
    auto* extract = app.add_subcommand("extract", "Concept representations from dumps (CSV)");
    std::vector<std::string> e_dumps;
    int e_layer = 1, e_timestamp = 0, e_window = rep::kDefaultWindow, e_naming = 1;
    std::string e_set = "all", e_out;
    bool e_centered = false;
    extract->add_option("--dump", e_dumps, "dump directory (repeatable)")->required();
    extract->add_option("--layer", e_layer)->required();
    extract->add_option("--timestamp", e_timestamp)->required();
    extract->add_option("--window", e_window)->capture_default_str();
    extract->add_option("--naming", e_naming)->capture_default_str();
    extract->add_option("--set", e_set, "actions | predicates | all")->capture_default_str();
    extract->add_flag("--centered", e_centered, "apply concept-set centering");
    extract->add_option("--out", e_out)->required();

    // curves
    auto* curves = app.add_subcommand("curves", "Similarity-vs-timestamp curves (CSV)");
    std::string c_manifest, c_out;
    curves->add_option("--manifest", c_manifest)->required();
    curves->add_option("--out", c_out)->required();

    // pca
    auto* pca = app.add_subcommand("pca", "PCA projection of a numeric CSV");
    std::string p_points, p_out;
    int p_k = 2;
    pca->add_option("--points", p_points, "CSV of one point per row")->required();
    pca->add_option("--k", p_k)->capture_default_str();
    pca->add_option("--out", p_out)->required();

    // steer / patch
    auto* steer_cmd = app.add_subcommand("steer", "Run an intervention manifest");
    std::string st_manifest, st_out;
    int st_jobs = 1;
    steer_cmd->add_option("--manifest", st_manifest)->required();
    steer_cmd->add_option("--out", st_out, "output directory")->required();
    steer_cmd->add_option("--jobs", st_jobs)->capture_default_str();

    auto* patch = app.add_subcommand("patch",
                                     "Run an intervention manifest with deranged tables");
    std::string pa_manifest, pa_out;
    int pa_jobs = 1;
    patch->add_option("--manifest", pa_manifest)->required();
    patch->add_option("--out", pa_out, "output directory")->required();
    patch->add_option("--jobs", pa_jobs)->capture_default_str();

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "t-test table from a run ledger");
    std::string x_ledger, x_out;
    stats_cmd->add_option("--ledger", x_ledger, "ledger.csv from a run")->required();
    stats_cmd->add_option("--out", x_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen) return cmd_gen(gen_blocks, gen_count, gen_seed, resolve_out(gen_out));
        if (*render)
            return cmd_render(r_puzzles, r_naming, r_tmpl, r_noswap, resolve_out(r_out));
        if (*verify) return cmd_verify(v_puzzles, v_plans, resolve_out(v_out));
        if (*score) return cmd_score(s_puzzles, s_answers, resolve_out(s_out));
        if (*rollout) return cmd_rollout(ro_manifest, resolve_out(ro_out), ro_jobs);
        if (*extract)
            return cmd_extract(e_dumps, e_layer, e_timestamp, e_window, e_naming, e_set,
                               e_centered, resolve_out(e_out));
        if (*curves) return cmd_curves(c_manifest, resolve_out(c_out));
        if (*pca) return cmd_pca(p_points, p_k, resolve_out(p_out));
        if (*steer_cmd) return run_experiment(st_manifest, resolve_out(st_out), st_jobs, false);
        if (*patch) return run_experiment(pa_manifest, resolve_out(pa_out), pa_jobs, true);
        if (*stats_cmd) return cmd_stats(x_ledger, resolve_out(x_out));
    } catch (const MissingInput& e) {
        std::cerr << e.what() << "\n";
        return kExitMissingInput;
    } catch (const FormatError& e) {
        std::cerr << e.what() << "\n";
        return kExitFormat;
    } catch (const trace::FormatVersionMismatch& e) {
        std::cerr << e.what() << "\n";
        return kExitFormat;
    } catch (const trace::ShapeMismatch& e) {
        std::cerr << e.what() << "\n";
        return kExitFormat;
    } catch (const trace::TruncatedFile& e) {
        std::cerr << e.what() << "\n";
        return kExitFormat;
    } catch (const bw::SizeLimit& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const obf::UnknownNaming& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
