"""
Serviço para exportação de relatórios consolidados (SVG/PDF/DOCX)
"""

import logging
import math
from typing import Dict, Sequence

logger = logging.getLogger(__name__)

# Cores das séries, em ordem
PALETTE = ('#8B5CF6', '#0EA5E9', '#F97316', '#10B981', '#EF4444', '#6366F1', '#EAB308', '#64748B')

CONNECTION_HEADERS = ['lambda', 'conexão', 'origem', 'destino', 'epsilon', 's0', 'dist. final', 'certificados']

Series = tuple[str, Sequence[float], Sequence[float]]


def _axis_range(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        pad = max(0.5, abs(hi) * 0.1)
        return lo - pad, hi + pad
    return lo, hi


class ExportService:
    """Serviço para renderizar o relatório em diferentes formatos"""

    def line_chart(self, title: str, series: list[Series], x_label: str = 'x', y_label: str = 'y',
                   width: int = 450, height: int = 300):
        """Gráfico de linhas simples (Drawing do reportlab)"""
        from reportlab.graphics.charts.legends import Legend
        from reportlab.graphics.charts.lineplots import LinePlot
        from reportlab.graphics.shapes import Drawing, String
        from reportlab.lib import colors

        series = [(label, list(xs), list(ys)) for label, xs, ys in series if len(xs) > 0]
        if not series:
            raise ValueError(f"Gráfico sem séries: {title}")

        drawing = Drawing(width, height)
        drawing.add(String(width / 2, height - 16, title, fontSize=11, textAnchor='middle'))

        plot = LinePlot()
        plot.x, plot.y = 50, 40
        plot.width, plot.height = width - 180, height - 80
        plot.data = [list(zip(map(float, xs), map(float, ys))) for _, xs, ys in series]
        all_x = [float(x) for _, xs, _ in series for x in xs]
        all_y = [float(y) for _, _, ys in series for y in ys]
        plot.xValueAxis.valueMin, plot.xValueAxis.valueMax = _axis_range(all_x)
        plot.yValueAxis.valueMin, plot.yValueAxis.valueMax = _axis_range(all_y)
        plot.xValueAxis.labelTextFormat = '%.3g'
        plot.yValueAxis.labelTextFormat = '%.3g'
        for i in range(len(series)):
            plot.lines[i].strokeColor = colors.HexColor(PALETTE[i % len(PALETTE)])
            plot.lines[i].strokeWidth = 1.2
        drawing.add(plot)

        drawing.add(String(plot.x + plot.width / 2, 8, x_label, fontSize=9, textAnchor='middle'))
        drawing.add(String(10, plot.y + plot.height + 8, y_label, fontSize=9))

        legend = Legend()
        legend.x, legend.y = plot.x + plot.width + 20, plot.y + plot.height
        legend.fontSize = 8
        legend.alignment = 'right'
        legend.colorNamePairs = [(colors.HexColor(PALETTE[i % len(PALETTE)]), label)
                                 for i, (label, _, _) in enumerate(series)]
        drawing.add(legend)
        return drawing

    def table_drawing(self, title: str, headers: list[str], rows: list[list], col_width: int = 120,
                      row_height: int = 18):
        """Tabela desenhada com shapes (para SVG)"""
        from reportlab.graphics.shapes import Drawing, Rect, String
        from reportlab.lib import colors

        width = col_width * len(headers) + 20
        height = row_height * (len(rows) + 1) + 40
        drawing = Drawing(width, height)
        drawing.add(String(10, height - 16, title, fontSize=11))
        top = height - 30
        for r, row in enumerate([headers] + rows):
            y = top - (r + 1) * row_height
            fill = colors.HexColor('#EDE9FE') if r == 0 else colors.white
            for c, cell in enumerate(row):
                x = 10 + c * col_width
                drawing.add(Rect(x, y, col_width, row_height, fillColor=fill,
                                 strokeColor=colors.HexColor('#94A3B8'), strokeWidth=0.5))
                drawing.add(String(x + 4, y + 5, str(cell), fontSize=8))
        return drawing

    def to_svg(self, drawing) -> str:
        try:
            from reportlab.graphics import renderSVG
            return renderSVG.drawToString(drawing)
        except Exception as e:
            logger.error(f"Erro ao renderizar SVG: {str(e)}", exc_info=True)
            raise

    def profile_chart(self, profiles: list[Dict]):
        series = [(p['label'], p['x'], p['y']) for p in profiles]
        lam = profiles[0]['lambda']
        return self.line_chart(f"Equilíbrios, lambda = {lam:g}", series, 'x', 'u(x)')

    def convergence_chart(self, histories: list[Dict]):
        """Histórico de pullback em escala log10"""
        series = [(h['label'], h['s_k'], [math.log10(max(d, 1e-300)) for d in h['delta_k']]) for h in histories]
        return self.line_chart('Convergência do pullback', series, 's_k', 'log10 delta_k')

    def lap_chart(self, sequences: list[Dict]):
        series = [(s['label'], s['times'], s['laps']) for s in sequences]
        return self.line_chart('Número de voltas das diferenças', series, 't', 'lap')

    def morse_rows(self, inventory: Dict[str, list]) -> list[list]:
        return [[f"{float(lam):g}", z, label] for lam, entries in sorted(inventory.items(), key=lambda kv: float(kv[0]))
                for z, label in entries]

    def morse_chart(self, inventory: Dict[str, list]):
        return self.table_drawing('Decomposição de Morse', ['lambda', 'conjunto', 'rótulo'], self.morse_rows(inventory))

    def connection_rows(self, connections: list[Dict]) -> list[list]:
        rows = []
        for c in sorted(connections, key=lambda c: (float(c['lambda']), c['label'])):
            failed = [key for key, ok in sorted(c['certificates'].items()) if not ok]
            rows.append([
                f"{float(c['lambda']):g}", c['label'], c['source'], c['target'], f"{c['epsilon']:.1e}",
                f"{c['s0']:g}", f"{c['forward_distance']:.2e}", 'ok' if not failed else 'falhou: ' + ', '.join(failed),
            ])
        return rows

    def connection_chart(self, connections: list[Dict]):
        return self.table_drawing('Conexões verificadas', CONNECTION_HEADERS, self.connection_rows(connections),
                                  col_width=90)

    def export_to_pdf(self, report: Dict, drawings: list) -> bytes:
        """Exporta o relatório consolidado para PDF"""
        try:
            from io import BytesIO

            from reportlab.lib import colors
            from reportlab.lib.pagesizes import A4
            from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
            from reportlab.lib.units import inch
            from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

            buffer = BytesIO()
            # invariant=1 fixa data e id do documento
            doc = SimpleDocTemplate(buffer, pagesize=A4, invariant=1)
            story = []
            styles = getSampleStyleSheet()

            title_style = ParagraphStyle(
                'CustomTitle',
                parent=styles['Heading1'],
                fontSize=18,
                textColor=colors.HexColor('#8B5CF6'),
                spaceAfter=30
            )
            story.append(Paragraph('Relatório do laboratório Chafee-Infante', title_style))

            story.append(Paragraph('<b>Execuções</b>', styles['Heading2']))
            for run in report.get('runs', []):
                status = 'aprovada' if run['passed'] else 'reprovada'
                story.append(Paragraph(f"<b>{run['command']}</b> ({run['path']}): certificação {status}", styles['Normal']))
                for key, ok in sorted(run.get('certification', {}).items()):
                    story.append(Paragraph(f"&nbsp;&nbsp;{key}: {'ok' if ok else 'falhou'}", styles['Normal']))
            story.append(Spacer(1, 0.2 * inch))

            inventory = report.get('morse_inventory', {})
            if inventory:
                story.append(Paragraph('<b>Decomposição de Morse</b>', styles['Heading2']))
                table = Table([['lambda', 'conjunto', 'rótulo']] + self.morse_rows(inventory))
                table.setStyle(TableStyle([
                    ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#EDE9FE')),
                    ('GRID', (0, 0), (-1, -1), 0.5, colors.HexColor('#94A3B8')),
                    ('FONTSIZE', (0, 0), (-1, -1), 8),
                ]))
                story.append(table)
                story.append(Spacer(1, 0.2 * inch))

            connections = report.get('connections', [])
            if connections:
                story.append(Paragraph('<b>Conexões verificadas</b>', styles['Heading2']))
                table = Table([CONNECTION_HEADERS] + self.connection_rows(connections))
                table.setStyle(TableStyle([
                    ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#EDE9FE')),
                    ('GRID', (0, 0), (-1, -1), 0.5, colors.HexColor('#94A3B8')),
                    ('FONTSIZE', (0, 0), (-1, -1), 7),
                ]))
                story.append(table)
                story.append(Spacer(1, 0.2 * inch))

            census = report.get('census', {})
            if census:
                story.append(Paragraph('<b>Censo de limites</b>', styles['Heading2']))
                for label, count in sorted(census.items()):
                    story.append(Paragraph(f"{label}: {count}", styles['Normal']))
                story.append(Spacer(1, 0.2 * inch))

            if drawings:
                story.append(Paragraph('<b>Gráficos</b>', styles['Heading2']))
                for drawing in drawings:
                    story.append(drawing)
                    story.append(Spacer(1, 0.2 * inch))

            doc.build(story)
            buffer.seek(0)
            return buffer.getvalue()
        except Exception as e:
            logger.error(f"Erro ao exportar para PDF: {str(e)}", exc_info=True)
            raise

    def export_to_docx(self, report: Dict) -> bytes:
        """Exporta o relatório consolidado para DOCX (tabelas, sem gráficos)"""
        try:
            from io import BytesIO

            from docx import Document
            from docx.enum.text import WD_ALIGN_PARAGRAPH

            doc = Document()
            title = doc.add_heading('Relatório do laboratório Chafee-Infante', 0)
            title.alignment = WD_ALIGN_PARAGRAPH.CENTER

            doc.add_heading('Execuções', 1)
            for run in report.get('runs', []):
                status = 'aprovada' if run['passed'] else 'reprovada'
                doc.add_paragraph(f"{run['command']} ({run['path']}): certificação {status}")
                for key, ok in sorted(run.get('certification', {}).items()):
                    doc.add_paragraph(f"{key}: {'ok' if ok else 'falhou'}", style='List Bullet')

            inventory = report.get('morse_inventory', {})
            if inventory:
                doc.add_heading('Decomposição de Morse', 1)
                rows = self.morse_rows(inventory)
                table = doc.add_table(rows=len(rows) + 1, cols=3)
                table.style = 'Table Grid'
                for c, header in enumerate(['lambda', 'conjunto', 'rótulo']):
                    table.cell(0, c).text = header
                for r, row in enumerate(rows, start=1):
                    for c, cell in enumerate(row):
                        table.cell(r, c).text = str(cell)

            connections = report.get('connections', [])
            if connections:
                doc.add_heading('Conexões verificadas', 1)
                rows = self.connection_rows(connections)
                table = doc.add_table(rows=len(rows) + 1, cols=len(CONNECTION_HEADERS))
                table.style = 'Table Grid'
                for c, header in enumerate(CONNECTION_HEADERS):
                    table.cell(0, c).text = header
                for r, row in enumerate(rows, start=1):
                    for c, cell in enumerate(row):
                        table.cell(r, c).text = str(cell)

            census = report.get('census', {})
            if census:
                doc.add_heading('Censo de limites', 1)
                for label, count in sorted(census.items()):
                    doc.add_paragraph(f"{label}: {count}", style='List Bullet')

            histories = report.get('convergence', [])
            if histories:
                doc.add_heading('Convergência do pullback', 1)
                for h in histories:
                    final = h['delta_k'][-1] if h['delta_k'] else float('nan')
                    doc.add_paragraph(f"{h['label']} (lambda = {h['lambda']:g}): delta final {final:.3e}")

            buffer = BytesIO()
            doc.save(buffer)
            buffer.seek(0)
            return buffer.getvalue()
        except Exception as e:
            logger.error(f"Erro ao exportar para DOCX: {str(e)}", exc_info=True)
            raise


export_service = ExportService()
