#include "ilwp/cli.hpp"

#include "ilwp/analyzer.hpp"
#include "ilwp/codec.hpp"
#include "ilwp/error.hpp"
#include "ilwp/weight_store.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <unistd.h>

namespace ilwp::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::vector<int> parse_bit_list(std::string_view text)
{
    std::vector<int> bits;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string_view item = text.substr(start, end - start);
        int value = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
            throw ConfigError("--bits: '" + std::string(item) + "' is not an integer");
        check_bits(value);
        bits.push_back(value);
        start = end + 1;
    }
    return bits;
}

std::vector<std::uint8_t> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("error while reading '" + path.string() + "'");
    return bytes;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes)
{
    fs::path tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw IoError("error while writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

namespace {

std::string kb(std::uint64_t bits)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << to_kilobytes(bits);
    return s.str();
}

std::string summary_line(Mode mode, int bits, const SizeReport& r)
{
    std::ostringstream s;
    s << "mode=" << mode_name(mode) << " bits=" << bits << " texture_bits=" << r.texture_bits
      << " non_texture_bits=" << r.non_texture_bits << " header_bits=" << r.header_bits
      << " total_bits=" << r.total_bits << " texture_kb=" << kb(r.texture_bits)
      << " non_texture_kb=" << kb(r.non_texture_bits) << " header_kb=" << kb(r.header_bits)
      << " total_kb=" << kb(r.total_bits);
    return s.str();
}

json sizes_json(const SizeReport& r)
{
    return {{"texture_bits", r.texture_bits},       {"non_texture_bits", r.non_texture_bits},
            {"header_bits", r.header_bits},         {"total_bits", r.total_bits},
            {"texture_kb", to_kilobytes(r.texture_bits)}, {"non_texture_kb", to_kilobytes(r.non_texture_bits)},
            {"header_kb", to_kilobytes(r.header_bits)},   {"total_kb", to_kilobytes(r.total_bits)}};
}

json laplace_json(std::span<const double> values)
{
    if (values.size() < 2)
        return nullptr;
    try {
        const LaplaceFit fit = fit_laplace(values);
        return {{"mu", fit.mu}, {"b", fit.b}, {"count", fit.count}, {"entropy_nats", laplace_entropy(fit.b)}};
    } catch (const AnalysisError&) {
        return nullptr;
    }
}

std::vector<std::uint8_t> to_bytes(const std::string& text)
{
    return {text.begin(), text.end()};
}

// State shared by the subcommand handlers.
struct Options {
    std::string mode = "ill";
    std::string bits;
    std::string report;
    std::string input;
    std::string output;
    std::string out_flag;
    double bin_width = 0.01;
};

class Runner {
public:
    Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int dispatch(const std::string& command, const Options& opt)
    {
        try {
            opt_ = opt;
            output_ = resolve_output();
            if (command == "encode")
                encode();
            else if (command == "decode")
                decode();
            else if (command == "stats")
                stats();
            else if (command == "sweep")
                sweep();
            else if (command == "heatmap")
                heatmap();
            return kOk;
        } catch (const ConfigError& e) {
            return fail(kUsage, e.what());
        } catch (const IoError& e) {
            return fail(kIo, e.what());
        } catch (const Error& e) {
            return fail(kFormat, e.what());
        } catch (const std::exception& e) {
            return fail(kFormat, e.what());
        }
    }

private:
    int fail(int code, const std::string& what)
    {
        err_ << "ilwp: " << (context_.empty() ? "" : context_ + ": ") << what << '\n';
        return code;
    }

    std::optional<fs::path> resolve_output()
    {
        if (!opt_.output.empty() && !opt_.out_flag.empty() && opt_.output != opt_.out_flag)
            throw ConfigError("output given both positionally ('" + opt_.output + "') and via --out ('" +
                              opt_.out_flag + "')");
        const std::string& p = opt_.output.empty() ? opt_.out_flag : opt_.output;
        if (p.empty())
            return std::nullopt;
        return fs::path(p);
    }

    fs::path require_output(const char* what)
    {
        if (!output_)
            throw ConfigError(std::string("missing output path for ") + what);
        return *output_;
    }

    int single_bits()
    {
        context_ = "--bits";
        const auto list = parse_bit_list(opt_.bits);
        if (list.size() != 1)
            throw ConfigError("expects a single bit width, got '" + opt_.bits + "'");
        context_.clear();
        return list.front();
    }

    Mode mode()
    {
        context_ = "--mode";
        const Mode m = parse_mode(opt_.mode);
        context_.clear();
        return m;
    }

    std::string report_format(const char* fallback)
    {
        const std::string f = opt_.report.empty() ? fallback : opt_.report;
        if (f != "json" && f != "csv") {
            context_ = "--report";
            throw ConfigError("unknown report format '" + f + "' (expected json or csv)");
        }
        return f;
    }

    WeightStore load_store()
    {
        context_ = opt_.input;
        auto store = load_weight_store(read_file(opt_.input), fs::path(opt_.input).stem().string());
        context_.clear();
        return store;
    }

    // Summary lines move to stderr when the report itself occupies stdout.
    std::ostream& note() { return output_ ? out_ : err_; }

    void emit(const std::string& text)
    {
        if (output_) {
            context_ = output_->string();
            write_file_atomic(*output_, to_bytes(text));
            context_.clear();
        } else {
            out_ << text;
        }
    }

    void encode()
    {
        const Mode m = mode();
        const int bits = single_bits();
        const fs::path dest = require_output("encode");
        const WeightStore store = load_store();
        context_ = opt_.input;
        const EncodedModel enc = encode_model(store, m, bits);
        const auto bytes = serialize_model(enc);
        context_ = dest.string();
        write_file_atomic(dest, bytes);
        context_.clear();
        out_ << summary_line(m, bits, measure_sizes(enc)) << '\n';
    }

    void decode()
    {
        const fs::path dest = require_output("decode");
        context_ = opt_.input;
        const EncodedModel enc = parse_model(read_file(opt_.input));
        const WeightStore store = decode_model(enc);
        context_ = dest.string();
        write_file_atomic(dest, save_weight_store(store));
        context_.clear();
        out_ << summary_line(enc.mode, enc.bits, measure_sizes(enc)) << " layers=" << store.layer_count() << '\n';
    }

    void stats()
    {
        const Mode m = mode();
        const int bits = single_bits();
        const std::string format = report_format("json");
        const WeightStore store = load_store();
        context_ = opt_.input;
        const EncodeResult result = encode_model_traced(store, m, bits);

        std::vector<double> weights;
        for (std::size_t i = 1; i < store.layer_count(); ++i)
            for (const auto& k : store.layer(i).kernels)
                weights.insert(weights.end(), k.begin(), k.end());
        std::vector<double> residuals;
        std::vector<int> symbols;
        for (std::size_t i = 0; i < result.trace.planes.size(); ++i) {
            residuals.insert(residuals.end(), result.trace.quantized_values[i].begin(),
                             result.trace.quantized_values[i].end());
            symbols.insert(symbols.end(), result.trace.planes[i].symbols.begin(),
                           result.trace.planes[i].symbols.end());
        }
        const SizeReport sizes = measure_sizes(result.model);

        if (format == "csv") {
            if (!(opt_.bin_width > 0.0)) {
                context_ = "--bin-width";
                throw ConfigError("must be positive");
            }
            const auto wh = residual_histogram(weights, opt_.bin_width);
            const auto rh = residual_histogram(residuals, opt_.bin_width);
            std::map<std::int64_t, std::pair<std::uint64_t, std::uint64_t>> rows;
            for (const auto& [bin, c] : wh)
                rows[bin].first = c;
            for (const auto& [bin, c] : rh)
                rows[bin].second = c;
            std::ostringstream csv;
            csv << "bin_center,weight_count,residual_count\n";
            csv << std::setprecision(9);
            for (const auto& [bin, c] : rows)
                csv << static_cast<double>(bin) * opt_.bin_width << ',' << c.first << ',' << c.second << '\n';
            emit(csv.str());
        } else {
            json report;
            report["model"] = store.model_name();
            report["mode"] = std::string(mode_name(m));
            report["bits"] = bits;
            report["layers"] = store.layer_count();
            report["sizes"] = sizes_json(sizes);
            json sym = {{"count", symbols.size()}, {"zero_fraction", zero_fraction(symbols)}};
            if (!symbols.empty()) {
                const auto hist = make_histogram(symbols);
                sym["empirical_entropy_bits"] = empirical_entropy(hist);
                sym["huffman_average_length_bits"] = average_code_length(hist, result.model.table);
                sym["alphabet_size"] = hist.size();
            }
            report["symbols"] = sym;
            report["residual_laplace"] = m == Mode::Baseline ? json(nullptr) : laplace_json(residuals);
            report["weight_laplace"] = laplace_json(weights);
            report["svwh_ratio"] = store.layer_count() >= 3 ? json(svwh_ratio(store)) : json(nullptr);
            emit(report.dump(2) + "\n");
        }
        context_.clear();
        note() << summary_line(m, bits, sizes) << '\n';
    }

    void sweep()
    {
        const Mode m = mode();
        context_ = "--bits";
        const auto bit_list = parse_bit_list(opt_.bits);
        context_.clear();
        const std::string format = report_format("csv");
        const WeightStore store = load_store();
        context_ = opt_.input;
        const auto rows = sweep_bits(store, m, bit_list);
        context_.clear();

        if (format == "csv") {
            std::ostringstream csv;
            csv << "bits,texture_bits,non_texture_bits,header_bits,total_bits,texture_kb,non_texture_kb,header_kb,"
                   "total_kb\n";
            for (const auto& r : rows) {
                const auto& s = r.sizes;
                csv << r.bits << ',' << s.texture_bits << ',' << s.non_texture_bits << ',' << s.header_bits << ','
                    << s.total_bits << ',' << kb(s.texture_bits) << ',' << kb(s.non_texture_bits) << ','
                    << kb(s.header_bits) << ',' << kb(s.total_bits) << '\n';
            }
            emit(csv.str());
        } else {
            json report = json::array();
            for (const auto& r : rows) {
                json row = {{"bits", r.bits}};
                row.update(sizes_json(r.sizes));
                report.push_back(row);
            }
            emit(report.dump(2) + "\n");
        }
        for (const auto& r : rows)
            note() << summary_line(m, r.bits, r.sizes) << '\n';
    }

    void heatmap()
    {
        const std::string format = report_format("json");
        const WeightStore store = load_store();
        context_ = opt_.input;
        const SourceHeatmap map = prediction_source_heatmap(store);
        context_.clear();

        if (format == "csv") {
            std::ostringstream csv;
            csv << "target_layer,source_layer,count,percent\n" << std::setprecision(12);
            for (std::size_t r = 0; r < map.tallies.size(); ++r)
                for (std::size_t u = 0; u <= r; ++u)
                    csv << r + 1 << ',' << u << ',' << map.tallies[r][u] << ',' << map.percent[r][u] << '\n';
            emit(csv.str());
        } else {
            json report;
            report["model"] = store.model_name();
            json targets = json::array();
            for (std::size_t r = 0; r < map.tallies.size(); ++r)
                targets.push_back(r + 1);
            report["target_layers"] = targets;
            report["percent"] = map.percent;
            report["tallies"] = map.tallies;
            if (store.layer_count() >= 3)
                report["svwh_ratio"] = svwh_ratio(store);
            emit(report.dump(2) + "\n");
        }
        note() << "heatmap layers=" << store.layer_count() << " kernels=" << store.total_kernels() << '\n';
    }

    std::ostream& out_;
    std::ostream& err_;
    Options opt_;
    std::optional<fs::path> output_;
    std::string context_;
};

} // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Inter-layer weight prediction codec for depthwise convolution kernels", "ilwp"};
    app.require_subcommand(1);
    Options opt;

    auto add_io = [&](CLI::App* sub, const char* in_desc, const char* out_desc) {
        sub->add_option("input", opt.input, in_desc)->required();
        sub->add_option("output", opt.output, out_desc);
        sub->add_option("--out", opt.out_flag, out_desc);
    };
    auto add_mode = [&](CLI::App* sub) {
        sub->add_option("--mode", opt.mode, "baseline, fss, lss or ill")->default_str("ill");
    };

    auto* encode = app.add_subcommand("encode", "compress a .wgt store into an .ilw stream");
    add_mode(encode);
    encode->add_option("--bits", opt.bits, "quantization bits (2-8)")->default_str("8");
    add_io(encode, "input .wgt", "output .ilw");

    auto* decode = app.add_subcommand("decode", "reconstruct a .wgt store from an .ilw stream");
    add_io(decode, "input .ilw", "output .wgt");

    auto* stats = app.add_subcommand("stats", "size accounting, entropy and Laplace diagnostics");
    add_mode(stats);
    stats->add_option("--bits", opt.bits, "quantization bits (2-8)")->default_str("8");
    stats->add_option("--report", opt.report, "json (default) or csv histogram");
    stats->add_option("--bin-width", opt.bin_width, "histogram bin width for csv reports")->default_str("0.01");
    add_io(stats, "input .wgt", "report path (stdout when omitted)");

    auto* sweep = app.add_subcommand("sweep", "encode at several bit widths");
    add_mode(sweep);
    sweep->add_option("--bits", opt.bits, "comma-separated bit widths")->default_str("2,3,4,5,6,7,8");
    sweep->add_option("--report", opt.report, "csv (default) or json");
    add_io(sweep, "input .wgt", "report path (stdout when omitted)");

    auto* heatmap = app.add_subcommand("heatmap", "best-prediction source layer percentages");
    heatmap->add_option("--report", opt.report, "json (default) or csv");
    add_io(heatmap, "input .wgt", "report path (stdout when omitted)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    if (opt.bits.empty())
        opt.bits = command == "sweep" ? "2,3,4,5,6,7,8" : "8";
    Runner runner(out, err);
    return runner.dispatch(command, opt);
}

} // namespace ilwp::cli
