#include "glove/evaluate.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "glove/errors.hpp"
#include "glove/rng.hpp"

namespace glove {

TrainedPair train_models(const Dataset& d, std::span<const size_t> train_idx,
                         const EvalConfig& cfg) {
    if (train_idx.empty()) throw DataError("no training sessions");

    std::vector<Tensor> cap_x, cap_xv, in_x, in_xv;
    std::vector<int> cap_y, cap_yv, in_y, in_yv;
    const size_t val_session = train_idx.back();
    for (size_t idx : train_idx) {
        const auto w =
            session_windows(d.sessions[idx], cfg.window_len, cfg.step);
        auto& cx = idx == val_session ? cap_xv : cap_x;
        auto& cy = idx == val_session ? cap_yv : cap_y;
        auto& ix = idx == val_session ? in_xv : in_x;
        auto& iy = idx == val_session ? in_yv : in_y;
        cx.insert(cx.end(), w.capacitive.begin(), w.capacitive.end());
        cy.insert(cy.end(), w.labels.begin(), w.labels.end());
        ix.insert(ix.end(), w.inertial.begin(), w.inertial.end());
        iy.insert(iy.end(), w.gesture.begin(), w.gesture.end());
    }
    if (cap_x.empty())
        throw DataError(
            "training sessions yield no windows; need at least 2 training "
            "sessions with >= window_len frames each");

    TrainedPair tp;
    tp.inertial_spec = build_inertial_model(cfg.window_len);
    tp.capacitive_spec = build_capacitive_model(cfg.window_len);
    tp.inertial_fit = fit(tp.inertial_spec, in_x, in_y, in_xv, in_yv,
                          cfg.inertial_train);
    tp.inertial_weights = tp.inertial_fit.weights;
    tp.capacitive_fit = fit(tp.capacitive_spec, cap_x, cap_y, cap_xv, cap_yv,
                            cfg.capacitive_train);
    tp.capacitive_weights = tp.capacitive_fit.weights;
    return tp;
}

SessionRun run_session(const LabeledSession& s, const TrainedPair& models,
                       const EvalConfig& cfg) {
    SessionRun run;
    MovementDetectorConfig det = cfg.detector;
    if (det.threshold <= 0.0) {
        if (int(s.frames.size()) < cfg.calib_frames)
            throw DataError("session too short for threshold calibration");
        det.threshold = calibrate_threshold(
            std::span{s.frames.data(), size_t(cfg.calib_frames)}, det.span);
    }
    run.threshold = det.threshold;

    FusionGate gate(models.inertial_spec, models.inertial_weights,
                    models.capacitive_spec, models.capacitive_weights, det,
                    cfg.power);
    WindowBuffer wb(cfg.window_len, cfg.step);
    for (const auto& fr : s.frames) {
        auto slice = wb.push(fr);
        if (!slice) continue;
        auto iw = make_window(*slice, ChannelSet::Inertial3);
        auto cw = make_window(*slice, ChannelSet::Capacitive4);
        auto ev = gate.step(iw, cw);
        run.events.push_back(ev);
        run.truth.push_back(
            window_label(s.labels, slice->start_index, cfg.window_len));
        run.predicted.push_back(ev.label);
    }
    return run;
}

EvalReport evaluate(const Dataset& d, const EvalConfig& cfg) {
    auto folds = loso_folds(d);
    // Pre-draw per-fold seeds so every fold's init is independent of whether
    // earlier folds succeeded.
    Rng master(cfg.seed);
    std::vector<std::pair<uint64_t, uint64_t>> seeds(folds.size());
    for (auto& s : seeds) {
        s.first = master.next_u64();
        s.second = master.next_u64();
    }

    EvalReport rep;
    double f1_raw_sum = 0.0, f1_sm_sum = 0.0, savings_sum = 0.0, watts_sum = 0.0;
    for (size_t f = 0; f < folds.size(); ++f) {
        FoldResult fr;
        fr.test_session = d.sessions[folds[f].test].id;
        try {
            EvalConfig fold_cfg = cfg;
            fold_cfg.inertial_train.seed = seeds[f].first;
            fold_cfg.capacitive_train.seed = seeds[f].second;
            fold_cfg.inertial_train.verbose = cfg.verbose;
            fold_cfg.capacitive_train.verbose = cfg.verbose;

            auto models = train_models(d, folds[f].train, fold_cfg);
            fr.inertial_epochs = models.inertial_fit.epochs_run;
            fr.capacitive_epochs = models.capacitive_fit.epochs_run;

            auto run = run_session(d.sessions[folds[f].test], models, fold_cfg);
            fr.threshold = run.threshold;
            fr.windows = run.events.size();
            fr.raw = confusion(run.truth, run.predicted);
            fr.f1_raw = macro_f1(fr.raw);
            std::vector<int> smoothed =
                cfg.apply_smoothing ? smooth_labels(run.predicted, cfg.smoothing)
                                    : run.predicted;
            fr.smoothed = confusion(run.truth, smoothed);
            fr.f1_smoothed = macro_f1(fr.smoothed);

            // Invocation counters live in run_session's gate; recompute from
            // the event stages so the fold result is self-contained.
            for (const auto& ev : run.events) {
                if (ev.stage != Stage::Idle) ++fr.inertial_invocations;
                if (ev.stage == Stage::CapacitiveActive)
                    ++fr.capacitive_invocations;
            }
            double wsum = 0.0;
            for (const auto& ev : run.events) wsum += ev.power_watts;
            fr.average_watts = wsum / double(run.events.size());
            fr.savings = gating_savings(run.events, cfg.power);

            rep.total_raw += fr.raw;
            rep.total_smoothed += fr.smoothed;
            f1_raw_sum += fr.f1_raw;
            f1_sm_sum += fr.f1_smoothed;
            savings_sum += fr.savings;
            watts_sum += fr.average_watts;
        } catch (const std::exception& e) {
            fr.error = e.what();
            ++rep.failed_folds;
        }
        if (cfg.verbose) {
            if (fr.error.empty())
                std::fprintf(stderr,
                             "fold %s: f1 %.4f -> %.4f, %zu windows, %.3f W\n",
                             fr.test_session.c_str(), fr.f1_raw, fr.f1_smoothed,
                             fr.windows, fr.average_watts);
            else
                std::fprintf(stderr, "fold %s: FAILED (%s)\n",
                             fr.test_session.c_str(), fr.error.c_str());
        }
        rep.folds.push_back(std::move(fr));
    }

    const int good = int(rep.folds.size()) - rep.failed_folds;
    if (good == 0)
        throw Error("all folds failed; first error: " + rep.folds[0].error);
    rep.mean_f1_raw = f1_raw_sum / good;
    rep.mean_f1_smoothed = f1_sm_sum / good;
    rep.mean_savings = savings_sum / good;
    rep.mean_watts = watts_sum / good;
    return rep;
}

namespace {

nlohmann::json matrix_json(const ConfusionMatrix& m) {
    auto rows = nlohmann::json::array();
    for (int i = 0; i < kNumClasses; ++i) {
        auto row = nlohmann::json::array();
        for (int j = 0; j < kNumClasses; ++j) row.push_back(m.counts[i][j]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string report_json(const EvalReport& r, const EvalConfig& cfg) {
    nlohmann::json j;
    j["config"] = {
        {"window_len", cfg.window_len},
        {"step", cfg.step},
        {"detector_span", cfg.detector.span},
        {"threshold", cfg.detector.threshold <= 0.0
                          ? nlohmann::json("auto")
                          : nlohmann::json(cfg.detector.threshold)},
        {"power",
         {{"idle", cfg.power.idle_watts},
          {"inertial", cfg.power.inertial_watts},
          {"full", cfg.power.full_watts}}},
        {"smoothing",
         {{"enabled", cfg.apply_smoothing},
          {"max_gap", cfg.smoothing.max_gap},
          {"majority_k", cfg.smoothing.majority_k}}},
        {"seed", cfg.seed},
    };
    auto names = nlohmann::json::array();
    for (auto n : kClassNames) names.push_back(std::string(n));
    j["class_names"] = std::move(names);
    auto& folds = j["folds"] = nlohmann::json::array();
    for (const auto& f : r.folds) {
        nlohmann::json fj;
        fj["session"] = f.test_session;
        if (!f.error.empty()) {
            fj["error"] = f.error;
        } else {
            fj["f1_raw"] = f.f1_raw;
            fj["f1_smoothed"] = f.f1_smoothed;
            fj["windows"] = f.windows;
            fj["inertial_invocations"] = f.inertial_invocations;
            fj["capacitive_invocations"] = f.capacitive_invocations;
            fj["average_watts"] = f.average_watts;
            fj["savings"] = f.savings;
            fj["inertial_epochs"] = f.inertial_epochs;
            fj["capacitive_epochs"] = f.capacitive_epochs;
            fj["threshold"] = f.threshold;
        }
        folds.push_back(std::move(fj));
    }
    j["mean_f1_raw"] = r.mean_f1_raw;
    j["mean_f1_smoothed"] = r.mean_f1_smoothed;
    j["mean_savings"] = r.mean_savings;
    j["mean_watts"] = r.mean_watts;
    j["failed_folds"] = r.failed_folds;
    j["confusion_raw"] = matrix_json(r.total_raw);
    j["confusion_smoothed"] = matrix_json(r.total_smoothed);
    return j.dump(2);
}

void write_report(const EvalReport& r, const EvalConfig& cfg,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::trunc);
        if (!f) throw DataError("cannot write " + p.string());
        f << text;
    };
    write(dir / "summary.json", report_json(r, cfg));
    write(dir / "confusion_raw.csv", to_csv(r.total_raw));
    write(dir / "confusion_smoothed.csv", to_csv(r.total_smoothed));
    for (const auto& f : r.folds) {
        if (!f.error.empty()) continue;
        write(dir / ("fold_" + f.test_session + "_raw.csv"), to_csv(f.raw));
        write(dir / ("fold_" + f.test_session + "_smoothed.csv"),
              to_csv(f.smoothed));
    }
}

}  // namespace glove
