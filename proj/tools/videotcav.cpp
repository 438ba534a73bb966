#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vtcav/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Concept-based attribution for video action recognition models"};
    app.require_subcommand(1);

    vtcav::cmd::SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic moving-shape video corpus");
    s->add_option("--task", synth.task, "direction_lr or presence");
    s->add_option("--frames", synth.T, "frames per clip");
    s->add_option("--height", synth.H, "frame height");
    s->add_option("--width", synth.W, "frame width");
    s->add_option("--shape-size", synth.shape_size, "square edge length, pixels");
    s->add_option("--speed", synth.speed, "pixels per frame");
    s->add_option("--noise-std", synth.noise_std, "gaussian pixel noise sigma");
    s->add_option("--n-train", synth.n_train, "training clips");
    s->add_option("--n-test", synth.n_test, "test clips");
    s->add_option("--random-pool", synth.random_pool_size,
                  "also emit a mixed-content pool of this many clips");
    s->add_option("--out", synth.out, "output directory")->required();
    auto* synth_seed = s->add_option("--seed", synth.seed, "RNG seed");

    vtcav::cmd::TrainArgs train;
    auto* t = app.add_subcommand("train", "Train the reference 3D-conv classifier");
    t->add_option("--corpus", train.corpus_manifest, "corpus manifest JSON")->required();
    t->add_option("--out", train.out_dir, "model output directory")->required();
    t->add_option("--epochs", train.epochs, "training epochs");
    t->add_option("--lr", train.lr, "learning rate");
    auto* train_seed = t->add_option("--seed", train.seed, "RNG seed");

    vtcav::cmd::ConceptsArgs con;
    auto* c = app.add_subcommand("concepts", "Build concept sets from detection files");
    c->add_option("--videos", con.video_dir, "directory of .vtn video clips")->required();
    c->add_option("--detections", con.detections_dir, "directory of detection JSON files")
        ->required();
    c->add_option("--classes", con.classes, "detector labels to keep")->required();
    c->add_option("--out", con.out_dir, "output directory")->required();
    c->add_option("--frames", con.T, "frames per concept clip");
    c->add_option("--size", con.size, "concept clip spatial size");
    c->add_option("--iou", con.iou_threshold, "tracker IoU threshold");
    c->add_option("--max-gap", con.max_gap, "frames a track may skip before retiring");
    c->add_option("--pad", con.pad_value, "canvas padding value");

    std::string run_config;
    auto* r = app.add_subcommand("run", "Run a full attribution experiment");
    r->add_option("--config", run_config, "experiment config JSON")->required();

    vtcav::cmd::GradcamArgs gc;
    auto* g = app.add_subcommand("gradcam", "Render localization heatmaps for one clip");
    g->add_option("--model", gc.model_dir, "model directory")->required();
    g->add_option("--clip", gc.clip_path, "clip container path")->required();
    g->add_option("--layer", gc.layer, "probe layer name")->required();
    g->add_option("--class", gc.target_class, "target class name or index")->required();
    g->add_option("--alpha", gc.alpha, "overlay opacity in [0,1]");
    g->add_flag("--nearest", gc.nearest, "nearest-neighbor upsampling instead of trilinear");
    g->add_option("--out", gc.out_dir, "output directory")->required();

    std::string report_summary, report_out;
    auto* rp = app.add_subcommand("report", "Regenerate charts from an experiment summary");
    rp->add_option("--summary", report_summary, "summary JSON from a previous run")->required();
    rp->add_option("--out", report_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (s->parsed()) {
            synth.seed_set = synth_seed->count() > 0;
            vtcav::cmd::run_synth(synth);
        } else if (t->parsed()) {
            if (train_seed->count() == 0) throw std::invalid_argument("seed required (pass --seed)");
            vtcav::cmd::run_train(train);
        } else if (c->parsed()) {
            vtcav::cmd::run_concepts(con);
        } else if (r->parsed()) {
            vtcav::cmd::run_run(run_config);
        } else if (g->parsed()) {
            vtcav::cmd::run_gradcam(gc);
        } else if (rp->parsed()) {
            vtcav::cmd::run_report(report_summary, report_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
