#include "astf/cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "astf/bvh/bvh.hpp"
#include "astf/error.hpp"
#include "astf/eval/evaluate.hpp"
#include "astf/eval/metrics.hpp"
#include "astf/eval/separation.hpp"
#include "astf/net/checkpoint.hpp"
#include "astf/numerics/autograd.hpp"
#include "astf/train/config.hpp"
#include "astf/train/trainer.hpp"

namespace fs = std::filesystem;

namespace astf::cli {

namespace {

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string csv_cell(const std::optional<std::string>& s) {
    if (!s) return "";
    if (s->find_first_of(",\"\n") == std::string::npos) return *s;
    std::string q = "\"";
    for (char c : *s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string clip_bytes(const bvh::MotionClip& clip) {
    std::ostringstream os(std::ios::binary);
    bvh::write_clip(clip, os);
    return os.str();
}

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string x = e.path().extension().string();
        std::transform(x.begin(), x.end(), x.begin(), [](unsigned char c) { return std::tolower(c); });
        if (x == ext) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> read_joint_list(const fs::path& p) {
    std::vector<std::string> names;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line.substr(0, line.find('#')));
        if (!line.empty()) names.push_back(line);
    }
    if (names.empty()) throw DataError(p.string() + " lists no joints");
    return names;
}

// Settings shared by every command. Precedence: config file, then ASTF_SEED,
// then --seed and --set.
struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;

    train::TrainConfig config() const {
        train::TrainConfig cfg = config_path.empty() ? train::TrainConfig{} : train::load_config(config_path);
        if (const char* env = std::getenv("ASTF_SEED"); env && *env) train::set_config_value(cfg, "seed", env);
        if (seed) cfg.seed = *seed;
        for (const auto& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw ContractError("--set expects key=value, got '" + kv + "'");
            train::set_config_value(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
        }
        cfg.validate();
        return cfg;
    }
};

// preprocess ---------------------------------------------------------------

struct FileResult {
    std::string file;
    std::size_t clips = 0, valid = 0;
    Labels labels;
    std::string error;
};

FileResult preprocess_file(const fs::path& path, const std::string& dataset, const std::vector<std::string>* joints,
                           std::size_t length, const Labels& labels, const fs::path& out_dir) {
    FileResult r;
    r.file = path.filename().string();
    r.labels = labels;
    try {
        bvh::RawMotion raw = bvh::load_bvh(path);
        if (joints) raw = bvh::select_joints(raw, *joints);
        std::vector<bvh::MotionClip> clips;
        if (dataset == "xia")
            clips.push_back(bvh::preprocess_xia(raw, length));
        else
            clips = bvh::preprocess_bfa(raw, length);
        std::string stem = path.stem().string();
        for (std::size_t k = 0; k < clips.size(); ++k) {
            auto& c = clips[k];
            c.style_label = labels.style;
            c.content_label = labels.content;
            c.source = r.file + "#" + std::to_string(k);
            char suffix[32];
            std::snprintf(suffix, sizeof suffix, "_%03zu.clip", k);
            net::atomic_write(out_dir / (stem + suffix), clip_bytes(c));
            r.valid += c.valid_frames();
        }
        r.clips = clips.size();
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

int cmd_preprocess(const std::string& dataset, const fs::path& in_dir, const fs::path& out_dir,
                   const std::string& joints_arg, std::size_t length, std::size_t workers, std::ostream& out,
                   std::ostream& err) {
    auto files = files_with_extension(in_dir, ".bvh");
    std::map<std::string, Labels> sidecar;
    if (fs::exists(in_dir / "labels.csv")) sidecar = read_label_csv(in_dir / "labels.csv");
    std::optional<std::vector<std::string>> joints;
    if (joints_arg.empty())
        joints = bvh::default_joint_names();
    else if (joints_arg != "all")
        joints = read_joint_list(joints_arg);
    fs::create_directories(out_dir);

    std::vector<FileResult> results(files.size());
    auto work = [&](std::size_t i) {
        auto it = sidecar.find(files[i].filename().string());
        Labels l = it != sidecar.end() ? it->second : labels_from_name(files[i]);
        results[i] = preprocess_file(files[i], dataset, joints ? &*joints : nullptr, length, l, out_dir);
    };
    workers = std::max<std::size_t>(1, workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < files.size(); ++i) work(i);
    } else {
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < workers; ++w)
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < files.size(); i += workers) work(i);
            }));
        for (auto& j : jobs) j.get();
    }

    std::string manifest = "file,clips,valid_frames,style,content\n";
    std::size_t failures = 0, total = 0;
    for (const auto& r : results) {
        if (!r.error.empty()) {
            ++failures;
            err << "preprocess: skipped " << r.file << ": " << r.error << "\n";
            continue;
        }
        total += r.clips;
        manifest += csv_cell(r.file) + "," + std::to_string(r.clips) + "," + std::to_string(r.valid) + "," +
                    csv_cell(r.labels.style) + "," + csv_cell(r.labels.content) + "\n";
    }
    net::atomic_write(out_dir / "manifest.csv", manifest);
    out << "preprocessed " << (files.size() - failures) << " of " << files.size() << " files into " << total
        << " clips, " << failures << " failure" << (failures == 1 ? "" : "s") << "\n";
    return failures ? kExitData : kExitOk;
}

// train --------------------------------------------------------------------

int cmd_train(const Common& common, const fs::path& clip_dir, const fs::path& out_dir,
              std::optional<std::size_t> iterations, bool resume, bool force, std::ostream& out) {
    train::TrainConfig cfg = common.config();
    if (iterations) cfg.iterations = *iterations;
    auto clips = load_clip_dir(clip_dir);
    if (clips.empty()) throw DataError("no clips in " + clip_dir.string());
    const auto& first = clips.front();
    if (first.joints() != cfg.net.joints || first.length() != cfg.net.clip_length)
        throw DataError("clips are " + std::to_string(first.length()) + " frames x " +
                        std::to_string(first.joints()) + " joints but the config expects " +
                        std::to_string(cfg.net.clip_length) + " x " + std::to_string(cfg.net.joints));
    auto data = std::make_shared<const train::Dataset>(train::make_dataset(clips));
    fs::create_directories(out_dir);
    train::Trainer trainer(cfg, data);
    fs::path ck_path = out_dir / "checkpoint.astf";
    if (resume && fs::exists(ck_path)) {
        trainer.restore(net::read_checkpoint(ck_path), force);
        out << "resumed at iteration " << trainer.iteration() << "\n";
    }
    train::TrainOptions opt;
    opt.log_path = out_dir / "loss_log.csv";
    opt.checkpoint_path = ck_path;
    train::train(trainer, opt);
    out << "trained " << trainer.iteration() << " iterations on " << clips.size() << " clips ("
        << data->styles.size() << " styles); checkpoint " << ck_path.string() << "\n";
    return kExitOk;
}

// transfer -----------------------------------------------------------------

train::LoadedModel open_model(const Common& common, const fs::path& path, bool force) {
    if (!fs::exists(path)) throw DataError("checkpoint " + path.string() + " does not exist");
    net::Checkpoint ck = net::read_checkpoint(path);
    if (!common.config_path.empty()) net::check_config_hash(ck, train::config_hash(common.config()), force);
    return train::load_model(ck);
}

void check_clip_fits(const bvh::MotionClip& c, const train::TrainConfig& cfg, const std::string& what) {
    if (c.joints() != cfg.net.joints || c.length() != cfg.net.clip_length)
        throw DataError(what + " clip is " + std::to_string(c.length()) + " frames x " + std::to_string(c.joints()) +
                        " joints; the checkpoint expects " + std::to_string(cfg.net.clip_length) + " x " +
                        std::to_string(cfg.net.joints));
}

int cmd_transfer(const Common& common, const fs::path& content_path, const fs::path& style_path,
                 const fs::path& ck_path, const fs::path& out_path, bool force, std::ostream& out) {
    auto model = open_model(common, ck_path, force);
    auto content = bvh::read_clip(content_path);
    auto style = bvh::read_clip(style_path);
    check_clip_fits(content, model.config, "content");
    check_clip_fits(style, model.config, "style");
    NoGradGuard guard;
    auto g = model.generator->generate(train::to_motion(content), train::to_motion(style));
    bvh::MotionClip result = bvh::clip_from_matrix(g.m_g, content.mask, content);
    result.style_label = style.style_label;
    net::atomic_write(out_path, bvh::write_bvh(bvh::decode_clip(result)));
    double geo = eval::mean_geodesic(g.m_g, content.motion_matrix(), content.mask, content.joints());
    out << "wrote " << out_path.string() << " (" << content.valid_frames() << " frames)\n";
    out << "geodesic distance to content: " << geo << " rad\n";
    return kExitOk;
}

// eval / stats-report ------------------------------------------------------

int cmd_eval(const Common& common, const fs::path& clip_dir, const fs::path& ck_path, const fs::path& out_path,
             std::size_t probe_epochs, bool force, std::ostream& out) {
    auto model = open_model(common, ck_path, force);
    auto clips = load_clip_dir(clip_dir);
    eval::EvalOptions opt;
    opt.probe.epochs = probe_epochs;
    opt.probe.seed = common.config().seed;
    auto r = eval::evaluate(model, clips, opt);
    eval::write_metrics_json(out_path, r);
    out << eval::metrics_json(r);
    return kExitOk;
}

int cmd_stats_report(const Common& common, const std::string& clip_dir, std::size_t synthetic,
                     const fs::path& csv_path, const std::string& json_path, std::ostream& out) {
    std::uint64_t seed = common.config().seed;
    std::vector<bvh::MotionClip> clips;
    if (synthetic)
        clips = eval::synthetic_skew_corpus(synthetic, 200, 2, seed);
    else if (!clip_dir.empty())
        clips = load_clip_dir(clip_dir);
    else
        throw ContractError("stats-report needs --clips or --synthetic-skew");
    eval::SeparationOptions opt;
    opt.seed = seed;
    auto r = eval::separation_report(clips, opt);
    std::ostringstream csv;
    eval::write_descriptor_csv(csv, clips);
    net::atomic_write(csv_path, csv.str());

    nlohmann::ordered_json j;
    j["styles"] = r.styles;
    j["samples"] = r.samples;
    j["accuracy_mu_var"] = r.accuracy_two;
    j["accuracy_four_moments"] = r.accuracy_four;
    j["silhouette_mu_var"] = r.silhouette_two;
    j["silhouette_four_moments"] = r.silhouette_four;
    nlohmann::ordered_json cents = nlohmann::ordered_json::object();
    for (std::size_t s = 0; s < r.styles.size(); ++s) {
        std::vector<double> row(r.centroids.cols());
        for (Eigen::Index k = 0; k < r.centroids.cols(); ++k) row[static_cast<std::size_t>(k)] = r.centroids(static_cast<Eigen::Index>(s), k);
        cents[r.styles[s]] = row;
    }
    j["centroids"] = cents;
    if (!json_path.empty()) net::atomic_write(json_path, j.dump(2) + "\n");

    out << "clips " << r.samples << ", styles " << r.styles.size() << "\n";
    out << "probe accuracy (mu, var):              " << r.accuracy_two << "\n";
    out << "probe accuracy (mu, var, skew, kurt):  " << r.accuracy_four << "\n";
    out << "silhouette (mu, var):                  " << r.silhouette_two << "\n";
    out << "silhouette (mu, var, skew, kurt):      " << r.silhouette_four << "\n";
    return kExitOk;
}

}  // namespace

Labels labels_from_name(const fs::path& file) {
    std::string stem = file.stem().string();
    Labels l;
    auto a = stem.find('_');
    if (a == std::string::npos || a == 0) return l;
    l.style = stem.substr(0, a);
    auto b = stem.find('_', a + 1);
    std::string content = stem.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1);
    if (!content.empty() && !std::all_of(content.begin(), content.end(), [](unsigned char c) { return std::isdigit(c); }))
        l.content = content;
    return l;
}

std::map<std::string, Labels> read_label_csv(const fs::path& path) {
    std::istringstream in(slurp(path));
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::size_t> fcol, scol, ccol;
    std::map<std::string, Labels> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (!fcol) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == "file") fcol = i;
                if (cells[i] == "style") scol = i;
                if (cells[i] == "content") ccol = i;
            }
            if (!fcol || !scol) throw ParseError(lineno, "label csv header needs 'file' and 'style' columns");
            continue;
        }
        if (cells.size() <= std::max(*fcol, *scol)) throw ParseError(lineno, "too few columns");
        Labels l;
        if (!cells[*scol].empty()) l.style = cells[*scol];
        if (ccol && *ccol < cells.size() && !cells[*ccol].empty()) l.content = cells[*ccol];
        if (!out.emplace(cells[*fcol], l).second) throw ParseError(lineno, "duplicate entry for " + cells[*fcol]);
    }
    if (!fcol) throw ParseError(lineno, "label csv is empty");
    return out;
}

std::vector<bvh::MotionClip> load_clip_dir(const fs::path& dir) {
    std::vector<bvh::MotionClip> clips;
    for (const auto& p : files_with_extension(dir, ".clip")) clips.push_back(bvh::read_clip(p));
    return clips;
}

std::string render_svg(const bvh::MotionClip& clip, std::size_t stride) {
    if (stride == 0) throw ContractError("render: stride must be positive");
    bvh::RawMotion raw = bvh::decode_clip(clip);
    const auto& sk = raw.skeleton;
    std::vector<std::vector<Eigen::Vector3d>> poses;
    for (std::size_t f = 0; f < raw.frame_count; f += stride) {
        auto p = bvh::forward_kinematics(raw, f);
        Eigen::Vector3d root = p[0];
        for (auto& q : p) q.x() -= root.x();
        poses.push_back(std::move(p));
    }
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& p : poses)
        for (const auto& q : p) {
            if (first) {
                xmin = xmax = q.x();
                ymin = ymax = q.y();
                first = false;
            }
            xmin = std::min(xmin, q.x());
            xmax = std::max(xmax, q.x());
            ymin = std::min(ymin, q.y());
            ymax = std::max(ymax, q.y());
        }
    const double fig_h = 200.0, margin = 10.0;
    double span = std::max(ymax - ymin, xmax - xmin);
    double scale = span > 1e-9 ? fig_h / span : 1.0;
    double panel = (xmax - xmin) * scale + 2 * margin;
    double width = panel * static_cast<double>(poses.size()), height = (ymax - ymin) * scale + 2 * margin;

    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(std::strcmp(buf, "-0.000") == 0 ? "0.000" : buf);
    };
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
    for (std::size_t k = 0; k < poses.size(); ++k) {
        double ox = panel * static_cast<double>(k) + margin;
        svg << "<g stroke=\"black\" stroke-width=\"2\" data-frame=\"" << k * stride << "\">\n";
        for (std::size_t j = 0; j < sk.size(); ++j) {
            std::size_t p = sk[j].parent;
            if (p == bvh::kNoParent) continue;
            auto px = [&](const Eigen::Vector3d& q) { return ox + (q.x() - xmin) * scale; };
            auto py = [&](const Eigen::Vector3d& q) { return margin + (ymax - q.y()) * scale; };
            const auto& a = poses[k][p];
            const auto& b = poses[k][j];
            svg << "<line x1=\"" << num(px(a)) << "\" y1=\"" << num(py(a)) << "\" x2=\"" << num(px(b)) << "\" y2=\""
                << num(py(b)) << "\"/>\n";
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Motion style transfer with higher-order statistics", "astf"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--config", common.config_path, "Training config file (key = value)")->check(CLI::ExistingFile);
    app.add_option("--seed", common.seed, "Seed; overrides the config and ASTF_SEED");
    app.add_option("--set", common.overrides, "Config override key=value (repeatable)");

    std::string dataset, in_dir, out_dir, joints;
    std::size_t length = bvh::kDefaultClipLength, workers = 1;
    auto* pre = app.add_subcommand("preprocess", "BVH directory -> clip cache and manifest");
    pre->add_option("--dataset", dataset, "xia or bfa")->required()->check(CLI::IsMember({"xia", "bfa"}));
    pre->add_option("--in", in_dir, "Directory of .bvh files")->required();
    pre->add_option("--out", out_dir, "Output directory")->required();
    pre->add_option("--joints", joints, "File listing joint names to keep, or 'all' (default: 21-joint set)");
    pre->add_option("--length", length, "Clip length in frames")->check(CLI::PositiveNumber);
    pre->add_option("--workers", workers, "Files processed in parallel")->check(CLI::PositiveNumber);

    std::string clips_dir, train_out;
    std::optional<std::size_t> iterations;
    bool resume = false, force = false;
    auto* tr = app.add_subcommand("train", "Train on a clip cache");
    tr->add_option("--clips", clips_dir, "Clip cache directory")->required();
    tr->add_option("--out", train_out, "Run directory (checkpoint.astf, loss_log.csv)")->required();
    tr->add_option("--iterations", iterations, "Total iterations");
    tr->add_flag("--resume", resume, "Continue from the run directory's checkpoint");
    tr->add_flag("--force", force, "Accept a checkpoint whose config hash differs");

    std::string content, style, checkpoint, out_file;
    auto* tf = app.add_subcommand("transfer", "Stylise one clip with another");
    tf->add_option("--content", content, "Content clip")->required();
    tf->add_option("--style", style, "Style clip")->required();
    tf->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    tf->add_option("--out", out_file, "Output BVH")->required();
    tf->add_flag("--force", force, "Accept a config hash mismatch");

    std::size_t probe_epochs = 150;
    auto* ev = app.add_subcommand("eval", "Accuracy, FID and geodesic metrics as JSON");
    ev->add_option("--clips", clips_dir, "Clip cache directory")->required();
    ev->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    ev->add_option("--out", out_file, "Metrics JSON")->required();
    ev->add_option("--probe-epochs", probe_epochs, "Probe classifier epochs")->check(CLI::PositiveNumber);
    ev->add_flag("--force", force, "Accept a config hash mismatch");

    std::size_t synthetic = 0;
    std::string report_json;
    auto* sr = app.add_subcommand("stats-report", "Style separation by moment descriptors");
    sr->add_option("--clips", clips_dir, "Clip cache directory");
    sr->add_option("--synthetic-skew", synthetic, "Use N clips per style of the built-in skew corpus instead");
    sr->add_option("--out", out_file, "Descriptor CSV")->required();
    sr->add_option("--json", report_json, "Report JSON");

    std::string clip_file;
    std::size_t stride = 10;
    auto* rd = app.add_subcommand("render", "Stick-figure SVG of a clip");
    rd->add_option("--clip", clip_file, "Clip file")->required();
    rd->add_option("--out", out_file, "Output SVG")->required();
    rd->add_option("--stride", stride, "Frames between figures")->check(CLI::PositiveNumber);

    auto* dc = app.add_subcommand("dump-config", "Print the effective config");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (pre->parsed()) return cmd_preprocess(dataset, in_dir, out_dir, joints, length, workers, out, err);
        if (tr->parsed()) return cmd_train(common, clips_dir, train_out, iterations, resume, force, out);
        if (tf->parsed()) return cmd_transfer(common, content, style, checkpoint, out_file, force, out);
        if (ev->parsed()) return cmd_eval(common, clips_dir, checkpoint, out_file, probe_epochs, force, out);
        if (sr->parsed()) return cmd_stats_report(common, clips_dir, synthetic, out_file, report_json, out);
        if (rd->parsed()) {
            net::atomic_write(out_file, render_svg(bvh::read_clip(clip_file), stride));
            return kExitOk;
        }
        if (dc->parsed()) {
            auto cfg = common.config();
            out << train::dump_config(cfg);
            return kExitOk;
        }
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}

}  // namespace astf::cli
