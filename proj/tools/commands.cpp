#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "repset/bench.hpp"
#include "repset/checkpoint.hpp"
#include "repset/data_io.hpp"
#include "repset/errors.hpp"
#include "repset/inspect.hpp"
#include "repset/training.hpp"

namespace repset::cli {
namespace {

constexpr double kToyLearningRate = 0.1;

struct TrainFlags {
  std::string data;
  std::string synthetic;
  double val_fraction = 0.1;
  std::size_t m = 30;
  std::vector<std::size_t> card{20};
  std::string mode = "exact";
  std::string optimizer = "adam";
  double lr = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t patience = 20;
  bool normalize = false;
  bool hidden_fc = false;
  std::size_t hidden_units = 32;
  std::size_t threads = 1;
  std::string checkpoint = "checkpoint.json";
  std::string out = "metrics.csv";
  // --synthetic bench
  std::size_t n = 200;
  std::size_t set_card = 10;
  std::size_t dim = 20;
  std::size_t classes = 2;
  // --sweep
  bool sweep = false;
  std::vector<std::size_t> sweep_m{20, 30, 50, 100};
  std::vector<std::size_t> sweep_card{10, 20, 50};
};

struct EvalFlags {
  std::string data;
  std::string checkpoint;
  std::string out;
  std::size_t threads = 1;
};

struct InspectFlags {
  std::string checkpoint;
  std::string embeddings;
  std::size_t topk = 10;
  std::string out;
};

struct BenchFlags {
  std::vector<std::size_t> m{50};
  std::vector<std::size_t> card{50};
  std::vector<std::size_t> set_card{10, 50, 100};
  std::vector<std::size_t> n{200};
  std::vector<std::size_t> dim{20};
  std::string mode = "both";
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::size_t threads = 1;
  std::string out = "bench.csv";
};

struct VectorizeFlags {
  std::string docs;
  std::string embeddings;
  std::string stopwords;
  std::string out;
  bool keep_duplicates = false;
};

// Flag values that parse but break a documented constraint.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

TrainConfig make_config(const TrainFlags& f) {
  TrainConfig c;
  c.m = f.m;
  c.cardinality = f.card;
  c.mode = parse_match_mode(f.mode);
  c.learning_rate = f.lr;
  c.epochs = f.epochs;
  c.batch_size = f.batch_size;
  c.optimizer = parse_optimizer(f.optimizer);
  c.seed = f.seed;
  c.val_fraction = f.val_fraction;
  c.patience = f.patience;
  c.normalize_inputs = f.normalize;
  c.hidden_fc = f.hidden_fc;
  c.hidden_units = f.hidden_units;
  c.threads = f.threads;
  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  return c;
}

Dataset training_data(const TrainFlags& f) {
  if (f.synthetic == "toy") return synthetic_toy();
  if (f.synthetic == "bench") return synthetic_bench({f.n, f.set_card, f.dim, f.classes, f.seed, 1.0});
  if (f.data.empty()) throw UsageError("train needs --data PATH or --synthetic toy|bench");
  return load_set_file(f.data);
}

void write_metrics(const std::vector<EpochMetrics>& log, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "epoch,train_loss,train_acc,val_acc,seconds\n";
  out << std::setprecision(17);
  for (const auto& row : log) {
    out << row.epoch << ',' << row.train_loss << ',' << row.train_accuracy << ',';
    if (row.val_accuracy) {
      out << *row.val_accuracy;
    } else {
      out << "nan";
    }
    out << ',' << row.seconds << '\n';
  }
}

int cmd_sweep(const TrainFlags& f, const Dataset& data, const TrainConfig& base, std::ostream& out) {
  if (base.val_fraction <= 0.0) throw UsageError("--sweep needs --val-fraction > 0 for held-out error");
  std::ofstream csv = open_output(f.out);
  csv << "m/card";
  for (std::size_t card : f.sweep_card) csv << ',' << card;
  csv << '\n';
  out << "held-out error by m (rows) and hidden-set cardinality (columns)\n";
  for (std::size_t m : f.sweep_m) {
    csv << m;
    out << "m=" << m << ':';
    for (std::size_t card : f.sweep_card) {
      TrainConfig c = base;
      c.m = m;
      c.cardinality = {card};
      c.validate();
      const TrainResult r = train(data, c);
      const double err = 1.0 - evaluate(data, r.best.model, r.val_indices, c.threads).accuracy;
      csv << ',' << std::setprecision(17) << err;
      out << ' ' << fixed(err, 4);
    }
    csv << '\n';
    out << '\n';
  }
  out << "sweep: " << f.out << '\n';
  return kOk;
}

int cmd_train(const TrainFlags& f, std::ostream& out) {
  if (!f.synthetic.empty() && !f.data.empty()) throw UsageError("--data and --synthetic are exclusive");
  const TrainConfig config = make_config(f);
  const Dataset data = training_data(f);
  if (f.sweep) return cmd_sweep(f, data, config, out);

  const TrainResult result = train(data, config);
  const EvalResult tr = evaluate(data, result.best.model, result.train_indices, config.threads);

  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.model = result.best.model;
  ckpt.class_names = data.class_names;
  ckpt.epoch = result.best.epoch;
  ckpt.best_val_accuracy = result.best.best_accuracy;
  save_checkpoint(ckpt, f.checkpoint);
  write_metrics(result.log, f.out);

  out << "trained " << result.log.size() << " epoch(s), best epoch " << result.best.epoch << '\n';
  out << "train_accuracy=" << fixed(tr.accuracy) << " train_loss=" << fixed(tr.mean_loss);
  if (!result.val_indices.empty()) {
    const EvalResult va = evaluate(data, result.best.model, result.val_indices, config.threads);
    out << " val_accuracy=" << fixed(va.accuracy);
  } else {
    out << " val_accuracy=n/a";
  }
  out << '\n' << "checkpoint: " << f.checkpoint << '\n' << "metrics: " << f.out << '\n';
  return kOk;
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const Dataset data = load_set_file(f.data, {ckpt.class_names, true});
  const EvalResult r = evaluate(data, ckpt.model, {}, f.threads);
  const std::string line =
      "accuracy=" + fixed(r.accuracy) + " mean_loss=" + fixed(r.mean_loss) +
      " examples=" + std::to_string(r.examples);
  if (!f.out.empty()) {
    std::ofstream csv = open_output(f.out);
    csv << "accuracy,mean_loss,examples\n"
        << std::setprecision(17) << r.accuracy << ',' << r.mean_loss << ',' << r.examples << '\n';
  }
  out << line << '\n';
  return kOk;
}

int cmd_predict(const EvalFlags& f, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const Dataset data = load_set_file(f.data, {ckpt.class_names, false});
  check_compatible(data, ckpt.model);

  std::ostringstream rows;
  rows << "id,predicted_class,prob\n" << std::setprecision(17);
  for (const auto& ex : data.examples) {
    const PredictionRecord rec = forward(ckpt.model, ex.set).record;
    const std::size_t cls = rec.predicted();
    rows << csv_field(ex.id) << ',' << csv_field(ckpt.class_names[cls]) << ','
         << rec.probs(static_cast<Eigen::Index>(cls)) << '\n';
  }
  if (f.out.empty()) {
    out << rows.str();
  } else {
    std::ofstream csv = open_output(f.out);
    csv << rows.str();
    out << "predicted " << data.size() << " example(s): " << f.out << '\n';
  }
  return kOk;
}

int cmd_inspect(const InspectFlags& f, std::ostream& out) {
  if (f.topk < 1) throw UsageError("--topk must be at least 1");
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const EmbeddingTable table = load_embeddings(f.embeddings);
  if (table.dim() != ckpt.model.dim()) {
    throw DataError("dimension mismatch: checkpoint has d=" + std::to_string(ckpt.model.dim()) +
                    ", embeddings have d=" + std::to_string(table.dim()));
  }
  const auto report = inspect_hidden_sets(ckpt.model.hidden, table, f.topk);

  std::ostringstream tsv;
  tsv << "hidden_set\telement\trank\tterm\tcosine\n" << std::setprecision(17);
  for (const auto& entry : report) {
    const std::string element = entry.element ? std::to_string(*entry.element) : "centroid";
    for (std::size_t r = 0; r < entry.neighbors.size(); ++r) {
      tsv << entry.hidden_set << '\t' << element << '\t' << r + 1 << '\t' << entry.neighbors[r].term
          << '\t' << entry.neighbors[r].cosine << '\n';
    }
  }
  if (f.out.empty()) {
    out << tsv.str();
    return kOk;
  }
  std::ofstream file = open_output(f.out);
  file << tsv.str();
  for (const auto& entry : report) {
    out << "set " << entry.hidden_set << ' '
        << (entry.element ? "element " + std::to_string(*entry.element) : std::string("centroid"))
        << ':';
    for (const auto& nb : entry.neighbors) out << ' ' << nb.term;
    out << '\n';
  }
  out << "inspect: " << f.out << '\n';
  return kOk;
}

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  if (f.repeats < 1) throw UsageError("--repeats must be at least 1");
  std::vector<MatchMode> modes;
  if (f.mode == "both" || f.mode == "exact") modes.push_back(MatchMode::kExact);
  if (f.mode == "both" || f.mode == "relaxed") modes.push_back(MatchMode::kRelaxed);
  for (const auto* list : {&f.m, &f.card, &f.set_card, &f.n, &f.dim}) {
    if (list->empty()) throw UsageError("bench sweep ranges must be nonempty");
    if (std::find(list->begin(), list->end(), std::size_t{0}) != list->end()) {
      throw UsageError("bench sweep values must be at least 1");
    }
  }

  std::ofstream csv = open_output(f.out);
  csv << "mode,m,card,set_card,N,d,seconds\n";
  for (std::size_t m : f.m)
    for (std::size_t card : f.card)
      for (std::size_t set_card : f.set_card)
        for (std::size_t n : f.n)
          for (std::size_t d : f.dim)
            for (MatchMode mode : modes) {
              const BenchPoint p{mode, m, card, set_card, n, d};
              const double s = time_epoch(p, f.seed, f.repeats, f.threads);
              csv << to_string(mode) << ',' << m << ',' << card << ',' << set_card << ',' << n << ','
                  << d << ',' << std::setprecision(9) << s << '\n';
              out << to_string(mode) << " m=" << m << " card=" << card << " set_card=" << set_card
                  << " N=" << n << " d=" << d << ": " << fixed(s, 4) << " s/epoch\n";
            }
  out << "bench: " << f.out << '\n';
  return kOk;
}

int cmd_vectorize(const VectorizeFlags& f, std::ostream& out) {
  const EmbeddingTable table = load_embeddings(f.embeddings);
  const auto stopwords = f.stopwords.empty() ? std::unordered_set<std::string>{} : load_stopwords(f.stopwords);
  const Dataset data =
      vectorize_documents(load_documents(f.docs), table, stopwords, {f.keep_duplicates});
  write_set_file(data, f.out);
  out << "vectorized " << data.size() << " document(s), d=" << data.dim << ", "
      << data.num_classes() << " class(es): " << f.out << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Set classification with bipartite matching against trainable hidden sets", "repset"};
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint plus metrics CSV");
  train_cmd->add_option("--data", tf.data, "Labeled set file (JSON lines)");
  train_cmd->add_option("--synthetic", tf.synthetic, "Built-in dataset")->check(CLI::IsMember({"toy", "bench"}));
  train_cmd->add_option("--val-fraction", tf.val_fraction, "Held-out validation fraction")->capture_default_str();
  train_cmd->add_option("--m", tf.m, "Number of hidden sets")->capture_default_str();
  train_cmd->add_option("--card", tf.card, "Hidden-set cardinality, or m comma-separated values")
      ->delimiter(',')->capture_default_str();
  train_cmd->add_option("--mode", tf.mode)->check(CLI::IsMember({"exact", "relaxed"}))->capture_default_str();
  train_cmd->add_option("--optimizer", tf.optimizer)->check(CLI::IsMember({"adam", "sgd"}))->capture_default_str();
  auto* lr_opt = train_cmd->add_option("--lr", tf.lr, "Learning rate (toy preset: 0.1)")->capture_default_str();
  train_cmd->add_option("--epochs", tf.epochs)->capture_default_str();
  auto* batch_opt = train_cmd->add_option("--batch-size", tf.batch_size, "Examples per step (toy preset: 1)")
                        ->capture_default_str();
  train_cmd->add_option("--seed", tf.seed)->capture_default_str();
  train_cmd->add_option("--patience", tf.patience, "Early-stopping patience in epochs (0 disables)")->capture_default_str();
  train_cmd->add_flag("--normalize", tf.normalize, "L2-normalise input vectors");
  train_cmd->add_flag("--hidden-fc", tf.hidden_fc, "Insert a dense ReLU layer before the head");
  train_cmd->add_option("--hidden-units", tf.hidden_units)->capture_default_str();
  train_cmd->add_option("--threads", tf.threads)->capture_default_str();
  train_cmd->add_option("--checkpoint", tf.checkpoint, "Checkpoint output path")->capture_default_str();
  train_cmd->add_option("--out", tf.out, "Metrics CSV (or sweep CSV) output path")->capture_default_str();
  train_cmd->add_option("--n", tf.n, "Examples for --synthetic bench")->capture_default_str();
  train_cmd->add_option("--set-card", tf.set_card, "Set cardinality for --synthetic bench")->capture_default_str();
  train_cmd->add_option("--dim", tf.dim, "Dimension for --synthetic bench")->capture_default_str();
  train_cmd->add_option("--classes", tf.classes, "Classes for --synthetic bench")->capture_default_str();
  train_cmd->add_flag("--sweep", tf.sweep, "Held-out error over an (m, card) grid");
  train_cmd->add_option("--sweep-m", tf.sweep_m)->delimiter(',')->capture_default_str();
  train_cmd->add_option("--sweep-card", tf.sweep_card)->delimiter(',')->capture_default_str();

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and mean loss of a checkpoint on labeled data");
  eval_cmd->add_option("--data", ef.data)->required();
  eval_cmd->add_option("--checkpoint", ef.checkpoint)->required();
  eval_cmd->add_option("--out", ef.out, "Optional metrics CSV");
  eval_cmd->add_option("--threads", ef.threads)->capture_default_str();

  EvalFlags pf;
  auto* predict_cmd = app.add_subcommand("predict", "Per-example class and probability CSV");
  predict_cmd->add_option("--data", pf.data)->required();
  predict_cmd->add_option("--checkpoint", pf.checkpoint)->required();
  predict_cmd->add_option("--out", pf.out, "Predictions CSV (stdout when omitted)");

  InspectFlags inf;
  auto* inspect_cmd = app.add_subcommand("inspect", "Nearest vocabulary terms of hidden-set elements");
  inspect_cmd->add_option("--checkpoint", inf.checkpoint)->required();
  inspect_cmd->add_option("--embeddings", inf.embeddings)->required();
  inspect_cmd->add_option("--topk", inf.topk)->capture_default_str();
  inspect_cmd->add_option("--out", inf.out, "TSV output (stdout when omitted)");

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "Seconds per training epoch over a parameter grid");
  bench_cmd->add_option("--m", bf.m)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--card", bf.card)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--set-card", bf.set_card)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--n", bf.n)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--dim", bf.dim)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--mode", bf.mode)->check(CLI::IsMember({"exact", "relaxed", "both"}))->capture_default_str();
  bench_cmd->add_option("--seed", bf.seed)->capture_default_str();
  bench_cmd->add_option("--repeats", bf.repeats, "Timed epochs per grid point")->capture_default_str();
  bench_cmd->add_option("--threads", bf.threads)->capture_default_str();
  bench_cmd->add_option("--out", bf.out)->capture_default_str();

  VectorizeFlags vf;
  auto* vec_cmd = app.add_subcommand("vectorize", "Turn documents into sets of word embeddings");
  vec_cmd->add_option("--docs", vf.docs, "TSV: id<TAB>label<TAB>text")->required();
  vec_cmd->add_option("--embeddings", vf.embeddings)->required();
  vec_cmd->add_option("--stopwords", vf.stopwords);
  vec_cmd->add_option("--out", vf.out)->required();
  vec_cmd->add_flag("--keep-duplicates", vf.keep_duplicates, "Bag semantics: one vector per occurrence");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  // The 4-example toy task takes one step per example at a larger rate
  // unless told otherwise.
  if (*train_cmd && tf.synthetic == "toy") {
    if (lr_opt->count() == 0) tf.lr = kToyLearningRate;
    if (batch_opt->count() == 0) tf.batch_size = 1;
  }

  try {
    if (*train_cmd) return cmd_train(tf, out);
    if (*eval_cmd) return cmd_eval(ef, out);
    if (*predict_cmd) return cmd_predict(pf, out);
    if (*inspect_cmd) return cmd_inspect(inf, out);
    if (*bench_cmd) return cmd_bench(bf, out);
    if (*vec_cmd) return cmd_vectorize(vf, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const InvalidInput& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace repset::cli
