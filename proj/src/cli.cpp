#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsr/config.hpp"
#include "tsr/error.hpp"
#include "tsr/mlp.hpp"
#include "tsr/pipeline.hpp"
#include "tsr/synth.hpp"

namespace tsr {

namespace {

// ============================================================================
// Option bags
// ============================================================================

struct DetectOpts {
  std::string mode = "eu";
  std::string input;
  std::string config;
  std::string digit_model;
  std::string header_model;
  std::string out;
  std::string annotate;
};

struct TrainOpts {
  std::string corpus;
  std::string out;
  std::string task = "digits";
  int hidden = 48;
  int epochs = 30;
  std::uint64_t seed = 1;
  double lr = 0.4;
  double val_fraction = 0.1;
  int batch = 16;
};

struct CorpusOpts {
  std::string kind = "digits";
  std::string out;
  int per_class = 250;
  std::uint64_t seed = 1;
  double noise_max = 6.0;
  double tilt_max = 5.0;
  double scale_min = 40.0;
  double scale_max = 90.0;
};

struct SequenceOpts {
  std::string out;
  std::string truth;
  std::string mode = "eu";
  int value = 0;  ///< 0 = region default
  int frames = 12;
  int width = 640;
  int height = 480;
  int distractors = 3;
  int variant = 0;
  double noise = 4.0;
  double scale_from = 28.0;
  double scale_to = 64.0;
  double tilt = 0.0;
  bool no_sign = false;
  bool truck = false;
  std::uint64_t seed = 1;
};

struct EvalOpts {
  std::string detections;
  std::string truth;
  double iou = 0.3;
};

RegionMode parse_mode(const std::string& mode) {
  return mode == "eu" ? RegionMode::EU : RegionMode::US;
}

// ============================================================================
// Subcommand handlers
// ============================================================================

int run_detect(const DetectOpts& opt) {
  const RegionMode mode = parse_mode(opt.mode);
  PipelineParams params;
  if (!opt.config.empty()) params = load_config(opt.config);
  MlpParams digit_model = load_model_file(opt.digit_model);
  std::optional<MlpParams> header_model;
  if (!opt.header_model.empty()) header_model = load_model_file(opt.header_model);
  if (mode == RegionMode::US && !header_model.has_value())
    throw ArgumentError("detect: --header-model is required with --mode us");

  Pipeline pipeline(mode, std::move(params), std::move(digit_model),
                    std::move(header_model));
  const RunSummary summary =
      run_sequence(opt.input, pipeline, opt.out, opt.annotate);

  std::cout << "frames " << summary.frames << '\n'
            << "candidates " << summary.candidates << '\n'
            << "hypotheses " << summary.hypotheses << '\n'
            << "validated " << summary.events << '\n'
            << std::fixed << std::setprecision(1) << "fps " << summary.fps
            << '\n';
  return 0;
}

int run_train(const TrainOpts& opt) {
  const int num_classes = opt.task == "digits" ? 10 : 2;
  const DigitDataset dataset = load_dataset(opt.corpus, num_classes);
  TrainHyper hyper;
  hyper.hidden_size = opt.hidden;
  hyper.learning_rate = opt.lr;
  hyper.epochs = opt.epochs;
  hyper.seed = opt.seed;
  hyper.validation_fraction = opt.val_fraction;
  hyper.batch_size = opt.batch;

  const TrainResult result = mlp_train(dataset, hyper);
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& epoch : result.report.epochs) {
    std::cout << "epoch " << epoch.epoch << " train_loss " << epoch.train_loss
              << " train_acc " << epoch.train_accuracy << " val_acc "
              << epoch.val_accuracy << '\n';
  }
  std::cout << "train_examples " << result.report.train_examples << '\n'
            << "val_examples " << result.report.val_examples << '\n';
  save_model_file(result.params, opt.out);
  std::cout << "saved " << opt.out << '\n';
  return 0;
}

int run_corpus(const CorpusOpts& opt) {
  CorpusRanges ranges;
  ranges.noise_max = opt.noise_max;
  ranges.tilt_max = opt.tilt_max;
  ranges.scale_min = opt.scale_min;
  ranges.scale_max = opt.scale_max;
  const DigitDataset dataset =
      opt.kind == "digits"
          ? generate_digit_corpus(opt.per_class, ranges, opt.seed)
          : generate_header_corpus(opt.per_class, ranges, opt.seed);
  save_dataset(dataset, opt.out);
  std::cout << "examples " << dataset.size() << '\n'
            << "saved " << opt.out << '\n';
  return 0;
}

int run_sequence_cmd(const SequenceOpts& opt) {
  const RegionMode mode = parse_mode(opt.mode);
  if (opt.truck && mode != RegionMode::US)
    throw ArgumentError("synth sequence: --truck requires --mode us");

  ScenarioSpec spec;
  spec.frame_count = opt.frames;
  spec.width = opt.width;
  spec.height = opt.height;
  spec.seed = opt.seed;
  spec.distractor_count = opt.distractors;
  spec.noise_sigma = opt.noise;
  if (!opt.no_sign) {
    SignSpec sign;
    sign.mode = mode;
    sign.value = opt.value > 0 ? opt.value : (mode == RegionMode::EU ? 50 : 55);
    sign.font_variant = opt.variant;
    sign.tilt_deg = opt.tilt;
    sign.us_header = opt.truck ? UsHeader::TruckSpeed : UsHeader::SpeedLimit;
    sign.seed = opt.seed;
    spec.sign = sign;
    spec.trajectory = make_approach(spec, opt.scale_from, opt.scale_to);
  }
  const GeneratedSequence result = generate_sequence(spec, opt.out, opt.truth);
  std::cout << "frames " << result.frames_written << '\n'
            << "truth_signs " << (result.truth.has_value() ? 1 : 0) << '\n';
  return 0;
}

int run_eval(const EvalOpts& opt) {
  const EvalReport report = evaluate(opt.detections, opt.truth, opt.iou);
  std::cout << "total " << report.total << '\n'
            << "correct " << report.correct << '\n'
            << "missed " << report.missed << '\n'
            << "misclassified " << report.misclassified << '\n'
            << "false_alarms " << report.false_alarms << '\n'
            << std::fixed << std::setprecision(3) << "SCDR " << report.scdr
            << '\n'
            << "misclassification_rate " << report.misclassification_rate
            << '\n';
  return 0;
}

}  // namespace

// ============================================================================
// Entry point
// ============================================================================

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"speed-limit sign detection, recognition, and validation"};
  app.require_subcommand(1);

  DetectOpts dopt;
  auto* detect = app.add_subcommand(
      "detect", "run the full pipeline over a directory of PGM frames");
  detect->add_option("--mode", dopt.mode, "region variant")
      ->required()
      ->check(CLI::IsMember({"eu", "us"}));
  detect->add_option("--input", dopt.input, "directory of PGM frames")
      ->required();
  detect->add_option("--config", dopt.config, "key=value tuning file");
  detect->add_option("--digit-model", dopt.digit_model, "digit recognizer model")
      ->required();
  detect->add_option("--header-model", dopt.header_model,
                     "caption verifier model (required for us)");
  detect->add_option("--out", dopt.out, "detection JSONL output path")
      ->required();
  detect->add_option("--annotate", dopt.annotate,
                     "also write frames with boxes burned in");

  TrainOpts topt;
  auto* train = app.add_subcommand("train-odr",
                                   "train a recognizer on a corpus CSV");
  train->add_option("--corpus", topt.corpus, "corpus CSV path")->required();
  train->add_option("--task", topt.task, "digits or header")
      ->check(CLI::IsMember({"digits", "header"}));
  train->add_option("--hidden", topt.hidden, "hidden layer width");
  train->add_option("--epochs", topt.epochs, "training epochs");
  train->add_option("--seed", topt.seed, "shuffle / init seed");
  train->add_option("--lr", topt.lr, "learning rate");
  train->add_option("--val-fraction", topt.val_fraction,
                    "held-out validation fraction");
  train->add_option("--batch", topt.batch, "mini-batch size");
  train->add_option("--out", topt.out, "model output path")->required();

  auto* synth = app.add_subcommand("synth",
                                   "generate corpora and frame sequences");
  synth->require_subcommand(1);

  CorpusOpts copt;
  auto* corpus = synth->add_subcommand("corpus", "balanced training corpus");
  corpus->add_option("--kind", copt.kind, "digits or headers")
      ->check(CLI::IsMember({"digits", "headers"}));
  corpus->add_option("--per-class", copt.per_class, "examples per class");
  corpus->add_option("--out", copt.out, "corpus CSV output path")->required();
  corpus->add_option("--seed", copt.seed, "generator seed")->required();
  corpus->add_option("--noise-max", copt.noise_max, "max luminance noise sigma");
  corpus->add_option("--tilt-max", copt.tilt_max, "max |tilt| degrees");
  corpus->add_option("--scale-min", copt.scale_min, "min sign height px");
  corpus->add_option("--scale-max", copt.scale_max, "max sign height px");

  SequenceOpts sopt;
  auto* sequence =
      synth->add_subcommand("sequence", "synthetic approach sequence");
  sequence->add_option("--out", sopt.out, "output frame directory")->required();
  sequence->add_option("--seed", sopt.seed, "scenario seed")->required();
  sequence->add_option("--mode", sopt.mode, "region variant")
      ->check(CLI::IsMember({"eu", "us"}));
  sequence->add_option("--value", sopt.value, "sign value (0 = region default)");
  sequence->add_option("--frames", sopt.frames, "frame count");
  sequence->add_option("--width", sopt.width, "frame width");
  sequence->add_option("--height", sopt.height, "frame height");
  sequence->add_option("--noise", sopt.noise, "frame noise sigma");
  sequence->add_option("--distractors", sopt.distractors,
                       "distractor object count");
  sequence->add_flag("--no-sign", sopt.no_sign, "distractor-only sequence");
  sequence->add_flag("--truck", sopt.truck,
                     "render a TRUCK SPEED plate (us only; not a speed limit)");
  sequence->add_option("--scale-from", sopt.scale_from, "initial sign height");
  sequence->add_option("--scale-to", sopt.scale_to, "final sign height");
  sequence->add_option("--tilt", sopt.tilt, "sign tilt degrees");
  sequence->add_option("--variant", sopt.variant, "font variant 0..2");
  sequence->add_option("--truth", sopt.truth, "truth JSONL output path");

  EvalOpts eopt;
  auto* eval = app.add_subcommand("eval", "score detections against truth");
  eval->add_option("--detections", eopt.detections, "detection JSONL")
      ->required();
  eval->add_option("--truth", eopt.truth, "truth JSONL")->required();
  eval->add_option("--iou", eopt.iou, "overlap threshold");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("tsr");
  for (const auto& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(detect)) return run_detect(dopt);
    if (app.got_subcommand(train)) return run_train(topt);
    if (app.got_subcommand(synth)) {
      if (synth->got_subcommand(corpus)) return run_corpus(copt);
      return run_sequence_cmd(sopt);
    }
    return run_eval(eopt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace tsr
