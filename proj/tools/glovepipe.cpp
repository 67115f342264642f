// Command-line front end: generate synthetic sessions, train the two
// recognisers, run leave-one-session-out evaluation, stream a session through
// the gated pipeline, and smooth recorded event streams.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "glove/errors.hpp"
#include "glove/evaluate.hpp"
#include "glove/model_io.hpp"

using namespace glove;

namespace {

struct GenerateArgs {
    std::string out;
    uint64_t seed = 1;
    SynthConfig cfg;
};

struct TrainArgs {
    std::string dataset, out;
    EvalConfig cfg;
};

struct EvalArgs {
    std::string dataset, out;
    EvalConfig cfg;
};

struct StreamArgs {
    std::string input, inertial_model, capacitive_model;
    EvalConfig cfg;
    bool paced = false;
};

struct EventsArgs {
    std::string input = "-";
    SmoothingConfig cfg;
};

void add_train_flags(CLI::App* c, EvalConfig& cfg) {
    c->add_option("--epochs-inertial", cfg.inertial_train.max_epochs,
                  "max epochs for the movement net")
        ->capture_default_str();
    c->add_option("--epochs-capacitive", cfg.capacitive_train.max_epochs,
                  "max epochs for the gesture net")
        ->capture_default_str();
    c->add_option("--batch", cfg.inertial_train.batch_size, "batch size")
        ->capture_default_str();
    c->add_option("--patience", cfg.inertial_train.patience,
                  "early-stopping patience (epochs)")
        ->capture_default_str();
    c->add_option("--step-scale", cfg.inertial_train.opt.step_scale,
                  "optimizer step scale")
        ->capture_default_str();
    c->add_option("--rho", cfg.inertial_train.opt.rho,
                  "optimizer decay rate")
        ->capture_default_str();
}

void sync_train_flags(EvalConfig& cfg) {
    cfg.capacitive_train.batch_size = cfg.inertial_train.batch_size;
    cfg.capacitive_train.patience = cfg.inertial_train.patience;
    cfg.capacitive_train.opt = cfg.inertial_train.opt;
}

void add_window_flags(CLI::App* c, EvalConfig& cfg) {
    c->add_option("--window-len", cfg.window_len, "window length in frames")
        ->capture_default_str();
    c->add_option("--step", cfg.step, "window step in frames")
        ->capture_default_str();
}

void add_detector_flags(CLI::App* c, EvalConfig& cfg) {
    c->add_option("--threshold", cfg.detector.threshold,
                  "movement threshold (0 = calibrate from the session head)")
        ->capture_default_str();
    c->add_option("--span", cfg.detector.span, "movement detector span")
        ->capture_default_str();
    c->add_option("--calib-frames", cfg.calib_frames,
                  "frames used for auto calibration")
        ->capture_default_str();
}

void add_power_flags(CLI::App* c, EvalConfig& cfg) {
    c->add_option("--power-idle", cfg.power.idle_watts, "idle stage watts")
        ->capture_default_str();
    c->add_option("--power-inertial", cfg.power.inertial_watts,
                  "inertial stage watts")
        ->capture_default_str();
    c->add_option("--power-full", cfg.power.full_watts, "full pipeline watts")
        ->capture_default_str();
}

int run_generate(const GenerateArgs& a) {
    a.cfg.validate();
    std::filesystem::create_directories(a.out);
    Dataset d = synth_dataset(a.cfg, a.seed);
    for (const auto& s : d.sessions)
        write_session_csv(std::filesystem::path(a.out) / (s.id + ".csv"), s);
    std::printf("wrote %zu sessions to %s\n", d.sessions.size(), a.out.c_str());
    return 0;
}

int run_train(TrainArgs a) {
    sync_train_flags(a.cfg);
    Dataset d = load_dataset(a.dataset);
    std::vector<size_t> idx(d.sessions.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;

    Rng master(a.cfg.seed);
    a.cfg.inertial_train.seed = master.next_u64();
    a.cfg.capacitive_train.seed = master.next_u64();

    auto tp = train_models(d, idx, a.cfg);
    std::filesystem::create_directories(a.out);
    auto ipath = std::filesystem::path(a.out) / "inertial.model";
    auto cpath = std::filesystem::path(a.out) / "capacitive.model";
    save_model(ipath, tp.inertial_spec, tp.inertial_weights);
    save_model(cpath, tp.capacitive_spec, tp.capacitive_weights);

    auto line = [](const char* name, const ModelSpec& spec, const FitResult& fr,
                   const std::filesystem::path& path) {
        auto counts = count_parameters(spec);
        std::printf(
            "%s: %zu trainable params, %d epochs (best %d), val acc %.4f, "
            "saved %s (%ju bytes)\n",
            name, counts.trainable, fr.epochs_run, fr.best_epoch,
            fr.best_val_acc, path.string().c_str(),
            uintmax_t(std::filesystem::file_size(path)));
    };
    line("inertial", tp.inertial_spec, tp.inertial_fit, ipath);
    line("capacitive", tp.capacitive_spec, tp.capacitive_fit, cpath);
    return 0;
}

int run_eval(EvalArgs a) {
    sync_train_flags(a.cfg);
    Dataset d = load_dataset(a.dataset);
    EvalReport rep = evaluate(d, a.cfg);
    for (const auto& f : rep.folds) {
        if (f.error.empty())
            std::printf(
                "fold %s: f1_raw %.4f  f1_smoothed %.4f  watts %.4f  savings "
                "%.4f\n",
                f.test_session.c_str(), f.f1_raw, f.f1_smoothed,
                f.average_watts, f.savings);
        else
            std::printf("fold %s: FAILED (%s)\n", f.test_session.c_str(),
                        f.error.c_str());
    }
    std::printf("mean_f1_raw %.4f\n", rep.mean_f1_raw);
    std::printf("mean_f1_smoothed %.4f\n", rep.mean_f1_smoothed);
    std::printf("mean_savings %.4f\n", rep.mean_savings);
    if (!a.out.empty()) {
        write_report(rep, a.cfg, a.out);
        std::printf("report written to %s\n", a.out.c_str());
    }
    return 0;
}

int run_stream(const StreamArgs& a) {
    auto [ispec, iw] = load_model(a.inertial_model);
    auto [cspec, cw] = load_model(a.capacitive_model);
    LabeledSession s = read_session_csv(a.input);

    MovementDetectorConfig det = a.cfg.detector;
    if (det.threshold <= 0.0) {
        if (int(s.frames.size()) < a.cfg.calib_frames)
            throw DataError("session too short for threshold calibration");
        det.threshold = calibrate_threshold(
            std::span{s.frames.data(), size_t(a.cfg.calib_frames)}, det.span);
        std::fprintf(stderr, "# calibrated threshold %.6f\n", det.threshold);
    }

    FusionGate gate(ispec, iw, cspec, cw, det, a.cfg.power);
    WindowBuffer wb(a.cfg.window_len, a.cfg.step);

    using clock = std::chrono::steady_clock;
    std::vector<double> step_ms;
    const auto wall_start = clock::now();
    const auto t0 = s.frames.front().t;
    for (const auto& fr : s.frames) {
        if (a.paced) {
            auto due = wall_start + std::chrono::duration_cast<clock::duration>(
                                        std::chrono::duration<double>(fr.t - t0));
            std::this_thread::sleep_until(due);
        }
        auto slice = wb.push(fr);
        if (!slice) continue;
        const auto begin = clock::now();
        auto iwin = make_window(*slice, ChannelSet::Inertial3);
        auto cwin = make_window(*slice, ChannelSet::Capacitive4);
        auto ev = gate.step(iwin, cwin);
        const auto end = clock::now();
        step_ms.push_back(
            std::chrono::duration<double, std::milli>(end - begin).count());
        std::printf("%s\n", format_event_line(ev).c_str());
    }
    const double wall_s =
        std::chrono::duration<double>(clock::now() - wall_start).count();

    double mean = 0.0, mx = 0.0;
    for (double v : step_ms) {
        mean += v;
        mx = std::max(mx, v);
    }
    if (!step_ms.empty()) mean /= double(step_ms.size());
    std::vector<double> sorted = step_ms;
    std::sort(sorted.begin(), sorted.end());
    const double p99 =
        sorted.empty() ? 0.0 : sorted[size_t(0.99 * double(sorted.size() - 1))];
    std::fprintf(stderr,
                 "# frames=%zu windows=%zu wall_s=%.3f mean_step_ms=%.3f "
                 "p99_step_ms=%.3f max_step_ms=%.3f inertial_runs=%zu "
                 "capacitive_runs=%zu avg_watts=%.4f\n",
                 s.frames.size(), step_ms.size(), wall_s, mean, p99, mx,
                 gate.inertial_invocations(), gate.capacitive_invocations(),
                 gate.average_watts());
    return 0;
}

int run_events(const EventsArgs& a) {
    std::istream* in = &std::cin;
    std::ifstream file;
    if (a.input != "-") {
        file.open(a.input);
        if (!file) throw DataError("cannot open " + a.input);
        in = &file;
    }
    std::vector<int> labels;
    std::string line;
    size_t line_no = 0;
    while (std::getline(*in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        try {
            labels.push_back(parse_event_line(line).label);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (labels.empty()) throw DataError("no events in input");
    auto smoothed = smooth_labels(labels, a.cfg);
    for (const auto& ev : events_from_labels(smoothed))
        std::printf("%d\t%zu\t%zu\t%s\n", ev.label, ev.start, ev.end,
                    std::string(kClassNames[size_t(ev.label)]).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gated two-stage gesture recognition pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a key=value file");

    GenerateArgs gen;
    auto* cgen = app.add_subcommand("generate", "write synthetic sessions");
    cgen->add_option("--out", gen.out, "output directory")->required();
    cgen->add_option("--seed", gen.seed, "rng seed")->capture_default_str();
    cgen->add_option("--sessions", gen.cfg.sessions, "number of sessions")
        ->capture_default_str();
    cgen->add_option("--tries", gen.cfg.tries_per_gesture,
                     "instances of each gesture per session")
        ->capture_default_str();
    cgen->add_option("--gesture-len", gen.cfg.gesture_len,
                     "labelled frames per gesture")
        ->capture_default_str();
    cgen->add_option("--lead", gen.cfg.lead, "idle frames before the first gesture")
        ->capture_default_str();
    cgen->add_option("--tail", gen.cfg.tail, "idle frames after the last gesture")
        ->capture_default_str();
    cgen->add_option("--gaps", gen.cfg.gap_choices,
                     "idle gap lengths drawn between gestures")
        ->capture_default_str();
    cgen->add_option("--burst-amp", gen.cfg.burst_amp, "acceleration burst amplitude")
        ->capture_default_str();
    cgen->add_option("--accel-noise", gen.cfg.accel_noise, "idle accel noise sigma")
        ->capture_default_str();
    cgen->add_option("--cap-amp", gen.cfg.cap_amp, "capacitance pulse amplitude")
        ->capture_default_str();
    cgen->add_option("--cap-noise", gen.cfg.cap_noise, "capacitance noise sigma")
        ->capture_default_str();

    TrainArgs tra;
    auto* ctra = app.add_subcommand("train", "train both recognisers");
    ctra->add_option("--dataset", tra.dataset, "directory of session CSVs")
        ->required();
    ctra->add_option("--out", tra.out, "output directory for model files")
        ->required();
    ctra->add_option("--seed", tra.cfg.seed, "rng seed")->capture_default_str();
    ctra->add_flag("--verbose", tra.cfg.verbose, "per-epoch progress");
    add_window_flags(ctra, tra.cfg);
    add_train_flags(ctra, tra.cfg);

    EvalArgs eva;
    auto* ceva = app.add_subcommand(
        "eval", "leave-one-session-out cross-validation");
    ceva->add_option("--dataset", eva.dataset, "directory of session CSVs")
        ->required();
    ceva->add_option("--out", eva.out, "report directory");
    ceva->add_option("--seed", eva.cfg.seed, "rng seed")->capture_default_str();
    ceva->add_flag("--verbose", eva.cfg.verbose, "per-epoch progress");
    bool no_smoothing = false;
    ceva->add_flag("--no-smoothing", no_smoothing, "skip label smoothing");
    ceva->add_option("--max-gap", eva.cfg.smoothing.max_gap,
                     "gap filling: max run length")
        ->capture_default_str();
    ceva->add_option("--majority-k", eva.cfg.smoothing.majority_k,
                     "majority vote window (odd)")
        ->capture_default_str();
    add_window_flags(ceva, eva.cfg);
    add_detector_flags(ceva, eva.cfg);
    add_power_flags(ceva, eva.cfg);
    add_train_flags(ceva, eva.cfg);

    StreamArgs str;
    auto* cstr = app.add_subcommand("stream",
                                    "run one session through the gated pipeline");
    cstr->add_option("--input", str.input, "session CSV")->required();
    cstr->add_option("--inertial-model", str.inertial_model, "movement net file")
        ->required();
    cstr->add_option("--capacitive-model", str.capacitive_model,
                     "gesture net file")
        ->required();
    cstr->add_flag("--paced", str.paced, "pace frames at the recorded rate");
    add_window_flags(cstr, str.cfg);
    add_detector_flags(cstr, str.cfg);
    add_power_flags(cstr, str.cfg);

    EventsArgs evs;
    auto* cevs = app.add_subcommand("events",
                                    "smooth an event stream and list gestures");
    cevs->add_option("--input", evs.input, "event lines file, '-' for stdin")
        ->capture_default_str();
    cevs->add_option("--max-gap", evs.cfg.max_gap, "gap filling: max run length")
        ->capture_default_str();
    cevs->add_option("--majority-k", evs.cfg.majority_k,
                     "majority vote window (odd)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cgen) return run_generate(gen);
        if (*ctra) return run_train(tra);
        if (*ceva) {
            eva.cfg.apply_smoothing = !no_smoothing;
            return run_eval(eva);
        }
        if (*cstr) return run_stream(str);
        if (*cevs) return run_events(evs);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const ModelIoError& e) {
        std::fprintf(stderr, "model error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
