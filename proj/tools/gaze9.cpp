#include <malloc.h>
#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gaze9.hpp"

namespace fs = std::filesystem;
using namespace gaze9;

namespace {

// Exit codes by failure category.
enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kBadInput = 4,
  kTraining = 5,
};

struct Failure : std::runtime_error {
  Failure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
  int code;
};

void require_path(const fs::path& p, const std::string& what) {
  if (p.empty()) throw Failure(kUsage, what + " is required");
  if (!fs::exists(p)) throw Failure(kIo, what + " does not exist: " + p.string());
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Failure(kIo, "cannot write " + path);
  return file;
}

service::SessionConfig load_session_config(const std::string& path) {
  if (path.empty()) return {};
  require_path(path, "--config");
  return service::load_config(path);
}

struct Options {
  std::string dataset, weights, config, script, reference, listen, log_dir, output, history, split = "all";
  std::uint64_t seed = 1;
  int epochs = 30;
  int width = EyeStrip::kDoubleEyeWidth;
  std::size_t samples_per_epoch = 2000;
  int lr_period = 10;
  bool no_augment = false;
  std::vector<int> counts = {200, 50, 50, 50};
};

int gen_data(const Options& o) {
  if (o.dataset.empty()) throw Failure(kUsage, "--dataset is required");
  if (o.counts.size() != 4) throw Failure(kUsage, "--counts takes train,val,test-known,test-unknown");
  synth::SplitCounts counts{o.counts[0], o.counts[1], o.counts[2], o.counts[3]};
  fs::create_directories(o.dataset);
  const auto m = synth::generate_dataset(o.dataset, counts, synth::SynthParams{}, synth::unknown_user_params(), o.seed,
                                         o.width, [](std::size_t done, std::size_t total) {
                                           if (done % 500 == 0 || done == total) {
                                             std::cerr << "\rrendered " << done << "/" << total << std::flush;
                                           }
                                         });
  std::cerr << '\n';
  std::cout << "wrote " << m.records.size() << " images to " << o.dataset << '\n';
  return kOk;
}

int train(const Options& o) {
  require_path(o.dataset, "--dataset");
  if (o.weights.empty()) throw Failure(kUsage, "--weights is required");
  const auto manifest = synth::load_manifest(o.dataset);
  auto train_set = synth::load_split(manifest, synth::Split::kTrain);
  auto val_set = synth::load_split(manifest, synth::Split::kVal);
  if (train_set.empty() || val_set.empty()) throw Failure(kBadInput, "dataset needs non-empty train and val splits");

  estimator::ModelConfig config;
  config.width = train_set.front().strip.width();
  config.height = train_set.front().strip.height();
  estimator::TrainOptions opts;
  opts.epochs = o.epochs;
  opts.samples_per_epoch = o.samples_per_epoch;
  opts.lr_halving_period = o.lr_period;
  const auto augment_cfg = o.no_augment ? augment::AugmentConfig::none() : augment::AugmentConfig{};

  auto result = estimator::train(estimator::build_model<float>(config, o.seed), train_set, val_set, augment_cfg, opts,
                                 o.seed, [](const estimator::EpochStats& s) {
                                   std::cerr << "epoch " << s.epoch << "  loss " << std::fixed << std::setprecision(4)
                                             << s.train_loss << "  val top1 " << std::setprecision(2) << s.val_top1
                                             << "%\n";
                                 });
  estimator::save_weights(result.params, fs::path(o.weights));
  const std::string history = o.history.empty() ? o.weights + ".history.csv" : o.history;
  std::ofstream hs(history);
  if (!hs) throw Failure(kIo, "cannot write " + history);
  estimator::write_history_csv(hs, result.history);
  std::cout << "best epoch " << result.best_epoch << "; weights " << o.weights << "; history " << history << '\n';
  return kOk;
}

int eval(const Options& o) {
  require_path(o.dataset, "--dataset");
  require_path(o.weights, "--weights");
  const auto params = estimator::load_weights(fs::path(o.weights));
  const auto manifest = synth::load_manifest(o.dataset);
  std::vector<synth::Split> splits;
  if (o.split == "all") {
    splits = {synth::Split::kTestKnown, synth::Split::kTestUnknown};
  } else if (const auto s = synth::parse_split(o.split)) {
    splits = {*s};
  } else {
    throw Failure(kUsage, "unknown split '" + o.split + "'");
  }

  nlohmann::json reports = nlohmann::json::object();
  std::cout << std::left << std::setw(14) << "split" << std::right << std::setw(7) << "n" << std::setw(12)
            << "Top1 Acc." << std::setw(12) << "Top2 Acc." << '\n';
  for (auto s : splits) {
    const auto samples = synth::load_split(manifest, s);
    if (samples.empty()) continue;
    const auto r = estimator::evaluate(params, samples);
    reports[std::string(synth::split_name(s))] = r.to_json();
    std::cout << std::left << std::setw(14) << synth::split_name(s) << std::right << std::setw(7) << r.total
              << std::fixed << std::setprecision(2) << std::setw(12) << r.top1 << std::setw(12) << r.top2 << '\n';
  }
  if (!o.output.empty()) {
    std::ofstream js;
    open_output(o.output, js) << reports.dump(2) << '\n';
  }
  return kOk;
}

int simulate(const Options& o) {
  require_path(o.script, "--script");
  const auto cfg = load_session_config(o.config);
  const auto script = filter::load_script(o.script);
  const auto raw = filter::simulate_sequence(script, o.seed);
  filter::FilterWindow window(cfg.capacity);
  std::vector<std::optional<EyeState>> filtered;
  for (auto r : raw) filtered.push_back(window.push(r));
  std::ofstream file;
  filter::write_trace_csv(open_output(o.output, file), raw, filtered);
  return kOk;
}

int type(const Options& o) {
  require_path(o.script, "--script");
  const auto cfg = load_session_config(o.config);
  std::vector<std::optional<EyeState>> stream;
  std::size_t frames = 0;
  if (fs::path(o.script).extension() == ".jsonl") {
    const auto replay = service::read_session_log(fs::path(o.script));
    stream = replay.filtered_stream();
    if (!replay.records.empty()) frames = replay.records.back().frame - replay.records.front().frame + 1;
  } else {
    std::ifstream is(o.script);
    if (!is) throw Failure(kIo, "cannot open " + o.script);
    stream = t9::read_replay_csv(is);
    frames = stream.size();
  }
  const std::string text = t9::type_script(stream);
  const double elapsed = static_cast<double>(std::max<std::size_t>(frames, 1)) / cfg.fps;
  const auto metrics = t9::compute_metrics(text, o.reference, elapsed);
  nlohmann::json out = metrics.to_json();
  out["text"] = text;
  out["reference"] = o.reference;
  std::ofstream file;
  auto& os = open_output(o.output, file);
  if (&os != &std::cout) std::cout << text << '\n';
  os << out.dump(2) << '\n';
  return kOk;
}

int serve(const Options& o) {
  auto cfg = load_session_config(o.config);
  if (!o.weights.empty()) cfg.weights = o.weights;
  if (!o.log_dir.empty()) cfg.log_dir = o.log_dir;
  if (!o.listen.empty()) cfg.listen = o.listen;
  std::shared_ptr<const service::Model> model;
  if (!cfg.weights.empty()) {
    require_path(cfg.weights, "weights");
    model = std::make_shared<const service::Model>(estimator::load_weights(cfg.weights));
  }

  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  service::Server server(cfg, model, &std::cerr);
  const auto port = server.listen(service::parse_endpoint(cfg.listen));
  std::cout << "listening on port " << port << (model ? " with model " + cfg.weights.string() : " without a model")
            << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&sigs, &sig);
    server.stop();
  });
  server.run();
  waiter.join();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  // Training allocates the same large activation buffers every step; keep
  // them on the heap instead of mapping and unmapping them each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"Eye-gaze T9 keyboard: dataset synthesis, CNN training, filtering, typing and serving"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-data", "render a synthetic eye-strip dataset");
  gen->add_option("--dataset", o.dataset, "output directory")->required();
  gen->add_option("--seed", o.seed, "master seed")->capture_default_str();
  gen->add_option("--width", o.width, "strip width: 128 (both eyes) or 64 (one eye)")->capture_default_str();
  gen->add_option("--counts", o.counts, "images per class: train val test-known test-unknown")
      ->expected(4)
      ->delimiter(',')
      ->capture_default_str();

  auto* tr = app.add_subcommand("train", "train the estimator on a dataset");
  tr->add_option("--dataset", o.dataset)->required();
  tr->add_option("--weights", o.weights, "output weight file")->required();
  tr->add_option("--history", o.history, "history CSV (default: <weights>.history.csv)");
  tr->add_option("--seed", o.seed)->capture_default_str();
  tr->add_option("--epochs", o.epochs)->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--samples-per-epoch", o.samples_per_epoch, "augmented samples per epoch (0: full expansion)")
      ->capture_default_str();
  tr->add_option("--lr-period", o.lr_period, "epochs between learning-rate halvings")->capture_default_str();
  tr->add_flag("--no-augment", o.no_augment, "train on the raw images only");

  auto* ev = app.add_subcommand("eval", "report top-1/top-2 accuracy per split");
  ev->add_option("--dataset", o.dataset)->required();
  ev->add_option("--weights", o.weights)->required();
  ev->add_option("--split", o.split, "split name or 'all' (both test splits)")->capture_default_str();
  ev->add_option("--output", o.output, "EvalReport JSON path");

  auto* sim = app.add_subcommand("simulate", "simulate a noisy gaze stream and filter it");
  sim->add_option("--script", o.script, "noise script JSON")->required();
  sim->add_option("--seed", o.seed)->capture_default_str();
  sim->add_option("--config", o.config, "session config (capacity)");
  sim->add_option("--output", o.output, "trace CSV path (default stdout)");

  auto* ty = app.add_subcommand("type", "type a replayed filtered stream and score it");
  ty->add_option("--script", o.script, "replay CSV (frame,state) or session log .jsonl")->required();
  ty->add_option("--reference", o.reference, "reference text")->required();
  ty->add_option("--config", o.config, "session config (fps)");
  ty->add_option("--output", o.output, "metrics JSON path (default stdout)");

  auto* sv = app.add_subcommand("serve", "run the session service");
  sv->add_option("--listen", o.listen, "host:port (default 127.0.0.1:8765)");
  sv->add_option("--config", o.config, "session config file");
  sv->add_option("--weights", o.weights, "model weights for frame input");
  sv->add_option("--log-dir", o.log_dir, "session log directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return gen_data(o);
    if (tr->parsed()) return train(o);
    if (ev->parsed()) return eval(o);
    if (sim->parsed()) return simulate(o);
    if (ty->parsed()) return type(o);
    if (sv->parsed()) return serve(o);
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code;
  } catch (const estimator::TrainingError& e) {
    std::cerr << "training failed: " << e.what() << '\n';
    return kTraining;
  } catch (const nn::WeightsError& e) {
    std::cerr << "weights: " << e.what() << '\n';
    return e.code() == nn::WeightsErrorCode::kIo ? kIo : kBadInput;
  } catch (const synth::ManifestError& e) {
    std::cerr << "manifest: " << e.what() << '\n';
    return kBadInput;
  } catch (const ImageError& e) {
    std::cerr << "image: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kInternal;
}
